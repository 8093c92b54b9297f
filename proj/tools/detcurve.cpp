// detcurve command-line interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "detcurve/cloud_io.hpp"
#include "detcurve/lab.hpp"
#include "detcurve/parallel.hpp"

using namespace detcurve;

namespace {

Json vector_json(const VectorX<double>& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    const double x = v(i);
    out.push_back(std::isfinite(x) ? Json(x) : Json(x > 0 ? "inf" : "-inf"));
  }
  return out;
}

Json ellipsoid_json(const Ellipsoidd& b) {
  Json frame = Json::array();
  for (Index j = 0; j < b.frame.cols(); ++j) frame.push_back(vector_json(b.frame.col(j)));
  return {{"center", vector_json(b.center)}, {"axes", frame}, {"semi_lengths", vector_json(b.semi_lengths())}};
}

// "all", "ball:r" (|x| <= r) or "halfspace:i:t" (x_i <= t).
std::vector<Index> parse_set(const PointMeasure& mu, const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  std::vector<Index> out;
  if (parts.size() == 1 && parts[0] == "all") {
    for (Index i = 0; i < mu.size(); ++i) out.push_back(i);
  } else if (parts.size() == 2 && parts[0] == "ball") {
    const double r = std::stod(parts[1]);
    for (Index i = 0; i < mu.size(); ++i) {
      if (mu.point(i).norm() <= r) out.push_back(i);
    }
  } else if (parts.size() == 3 && parts[0] == "halfspace") {
    const int axis = std::stoi(parts[1]);
    const double t = std::stod(parts[2]);
    if (axis < 0 || axis >= mu.dim()) throw ConfigError("halfspace axis out of range");
    for (Index i = 0; i < mu.size(); ++i) {
      if (mu.point(i)(axis) <= t) out.push_back(i);
    }
  } else {
    throw ConfigError("cannot parse set '" + spec + "' (use all, ball:r or halfspace:i:t)");
  }
  return out;
}

void print_summary(const ScenarioReport& report) {
  for (const auto& c : report.checks) {
    const bool good = c.passed != c.expected_fail;
    std::printf("%-5s %-34s %.6g %s %.6g  margin %.6g%s\n", good ? "ok" : "BAD", c.name.c_str(), c.lhs,
                c.relation.c_str(), c.rhs, c.margin, c.expected_fail ? "  (expected to fail)" : "");
  }
  std::printf("%s: %s\n", report.config.value("name", std::string("scenario")).c_str(),
              report.ok() ? "all checks as expected" : "UNEXPECTED RESULTS");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Determinant functionals and curvature constants of discrete measures"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: DETCURVE_THREADS or all cores)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Estimate the curvature constant of a point cloud");
  std::string cloud;
  int k = 2;
  double alpha = 1.0;
  std::string mode = "search";
  double floor = -1.0;
  int frames = 64;
  int refine = 120;
  std::uint64_t seed = 1;
  analyze->add_option("cloud", cloud, "CSV or JSON point cloud")->required()->check(CLI::ExistingFile);
  analyze->add_option("--k", k, "Content dimension");
  analyze->add_option("--alpha", alpha, "Curvature exponent");
  analyze->add_option("--family", mode, "search or doubling");
  analyze->add_option("--floor", floor, "Minimal semi-length (default: median nearest-neighbour distance)");
  analyze->add_option("--frames", frames, "Random rotation frames");
  analyze->add_option("--refine", refine, "Local-search evaluations per start (0 disables)");
  analyze->add_option("--seed", seed, "Seed for frames");

  // functional
  auto* functional = app.add_subcommand("functional", "Evaluate T or T~ on indicator functions");
  double gamma = 0.5;
  std::vector<std::string> sets;
  bool tilde = false;
  std::int64_t samples = 0;
  std::int64_t budget = 10'000'000;
  functional->add_option("cloud", cloud, "CSV or JSON point cloud")->required()->check(CLI::ExistingFile);
  functional->add_option("--k", k, "Number of free points");
  functional->add_option("--gamma", gamma, "Kernel exponent");
  functional->add_option("--sets", sets, "Sets: all, ball:r, halfspace:i:t (last one repeats)");
  functional->add_flag("--tilde", tilde, "Pin the last point at the origin");
  functional->add_option("--samples", samples, "Monte Carlo samples instead of exact enumeration");
  functional->add_option("--budget", budget, "Maximum tuples for exact enumeration");
  functional->add_option("--seed", seed, "Monte Carlo seed");

  // verify
  auto* verify = app.add_subcommand("verify", "Run a scenario; exit status 0 iff every check behaves as expected");
  std::string scenario;
  std::string out;
  std::string format = "json";
  verify->add_option("scenario", scenario, "Scenario JSON file or bundled name")->required();
  verify->add_option("--out", out, "Write the report here");
  verify->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // report
  auto* report_cmd = app.add_subcommand("report", "Emit a report for a scenario or convert an existing report");
  report_cmd->add_option("input", scenario, "Scenario file/name or report JSON")->required();
  report_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  report_cmd->add_option("--out", out, "Output path ('-' for stdout)")->required();

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic point cloud");
  std::string family_name = "cube_lebesgue";
  int dim = 2;
  int count = 256;
  std::vector<std::string> params;
  gen->add_option("family", family_name, "cube_lebesgue, sphere_uniform, subspace_lebesgue, moment_curve")
      ->required();
  gen->add_option("--dim", dim, "Ambient dimension");
  gen->add_option("--count", count, "Number of atoms");
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--param", params, "key=value generator parameter");
  gen->add_option("--out", out, "Output file (.csv or .json)")->required();

  app.add_subcommand("list", "List bundled scenarios");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_thread_count(threads);

  try {
    if (*analyze) {
      const PointMeasure mu = load_cloud(cloud);
      FamilyOptions fo;
      fo.mode = family_mode_from_string(mode);
      fo.floor = floor;
      fo.random_frames = frames;
      fo.seed = seed;
      const auto family = make_family(mu, fo);
      const auto est = estimate_curvature_constant(mu, k, alpha, family, RefineOptions{8, refine});
      Json j{{"k", k},
             {"alpha", alpha},
             {"constant", est.constant},
             {"family_constant", est.family_constant},
             {"family_size", est.family_size},
             {"floor", family.floor},
             {"evaluations", est.evaluations},
             {"witness", ellipsoid_json(est.witness)}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*functional) {
      const PointMeasure mu = load_cloud(cloud);
      const int factors = tilde ? k : k + 1;
      if (sets.empty()) sets.push_back("all");
      std::vector<VectorX<double>> fs;
      for (int j = 0; j < factors; ++j) {
        const auto& spec = sets[std::min<std::size_t>(static_cast<std::size_t>(j), sets.size() - 1)];
        fs.push_back(indicator(mu, parse_set(mu, spec)));
      }
      FunctionalOptions options;
      options.budget = budget;
      FunctionalResult r;
      if (samples > 0) {
        if (tilde) throw ConfigError("--samples supports T only");
        r = monte_carlo_T(mu, k, gamma, fs, samples, seed, options);
      } else {
        r = tilde ? evaluate_T_tilde(mu, k, gamma, fs, options) : evaluate_T(mu, k, gamma, fs, options);
      }
      Json j{{"functional", tilde ? "T_tilde" : "T"},
             {"k", k},
             {"gamma", gamma},
             {"value", r.value},
             {"tuples_total", r.tuples_total},
             {"tuples_excluded", r.tuples_excluded},
             {"included_mass", r.included_mass},
             {"excluded_mass", r.excluded_mass}};
      if (r.std_error) j["std_error"] = *r.std_error;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*verify) {
      const auto report = run_scenario(load_config(scenario));
      print_summary(report);
      if (!out.empty()) emit_report(report, format, out);
      return report.ok() ? 0 : 1;
    }
    if (*report_cmd) {
      ScenarioReport report;
      bool converted = false;
      if (std::filesystem::is_regular_file(scenario)) {
        std::ifstream in(scenario);
        const Json j = Json::parse(in);
        if (j.contains("checks") && j.contains("config")) {
          report = report_from_json(j);
          converted = true;
        }
      }
      if (!converted) report = run_scenario(load_config(scenario));
      emit_report(report, format, out);
      return 0;
    }
    if (*gen) {
      GeneratorSpec spec;
      spec.family = generator_family_from_string(family_name);
      spec.dim = dim;
      spec.count = count;
      spec.seed = seed;
      for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects key=value");
        spec.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
      }
      save_cloud(out, generate(spec));
      return 0;
    }
    for (const auto& name : bundled_scenario_names()) std::cout << name << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "detcurve: " << e.what() << "\n";
    return 2;
  }
}
