#include <algorithm>
#include <filesystem>
#include <fstream>

#include "detcurve/cloud_io.hpp"
#include "detcurve/lab.hpp"

namespace detcurve {
namespace {

const char* const kCubeScenario = R"({
  "name": "lebesgue-cube-d2-k2",
  "generator": {"family": "cube_lebesgue", "dim": 2, "count": 256, "seed": 1},
  "k": 2, "alpha": 1.0, "gamma": 0.5,
  "eps_grid": [0.1, 0.2, 0.4],
  "seed": 11,
  "curvature_refinement": {"counts": [256, 1024], "factor": 2.0},
  "rwt": {"trials": 100, "slack": 0.0},
  "cauchy_schwarz": {"families": 50},
  "gaussian": {"forms": 20},
  "maximal": {"p": 1.0}
})";

const char* const kFlatScenario = R"({
  "name": "flat-subspace-negative",
  "generator": {"family": "subspace_lebesgue", "dim": 2, "count": 64, "seed": 1, "params": {"m": 1}},
  "k": 2, "alpha": 1.0, "gamma": 0.5,
  "eps_grid": [0.1, 0.2, 0.4],
  "seed": 5,
  "checks": ["mainst", "curvature_refinement", "admissibility"],
  "expected_fail": ["curvature_refinement", "admissibility"],
  "curvature_refinement": {"counts": [32, 128], "factor": 2.0}
})";

const char* const kSphereScenario = R"({
  "name": "sphere-pushforward-d3",
  "generator": {"family": "sphere_uniform", "dim": 3, "count": 500, "seed": 7},
  "transform": [[1, 0, 0], [0, 1, 0]],
  "k": 2, "alpha": 1.0, "gamma": 0.5,
  "eps_grid": [0.1, 0.2, 0.4],
  "seed": 3,
  "checks": ["mainst", "gaussian", "layer_cake", "curvature_refinement", "admissibility"],
  "curvature_refinement": {"counts": [500, 2000], "factor": 2.0}
})";

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown field '" + key + "' in " + where);
    }
  }
}

MatrixX<double> parse_matrix(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) throw ConfigError("transform must be a list of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  MatrixX<double> m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Index>(row.size()) != cols) throw ConfigError("transform rows differ in length");
    for (Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

GeneratorSpec parse_generator(const Json& j) {
  reject_unknown(j, {"family", "dim", "count", "seed", "params"}, "generator");
  GeneratorSpec spec;
  spec.family = generator_family_from_string(get_or<std::string>(j, "family", "cube_lebesgue"));
  spec.dim = get_or<int>(j, "dim", 2);
  spec.count = get_or<int>(j, "count", 256);
  spec.seed = get_or<std::uint64_t>(j, "seed", 1);
  if (j.contains("params")) {
    for (const auto& [key, value] : j.at("params").items()) spec.params[key] = value.get<double>();
  }
  return spec;
}

MeasureSource parse_source(const Json& j) {
  MeasureSource s;
  if (j.contains("generator")) {
    s.generator = parse_generator(j.at("generator"));
  } else if (j.contains("input")) {
    s.input = j.at("input").get<std::string>();
  } else {
    throw ConfigError("measure needs a 'generator' or an 'input' file");
  }
  if (j.contains("transform")) s.transform = parse_matrix(j.at("transform"));
  if (j.contains("slice")) {
    const auto& sl = j.at("slice");
    reject_unknown(sl, {"axis", "max_abs"}, "slice");
    s.slice_axis = sl.at("axis").get<int>();
    s.slice_max = sl.at("max_abs").get<double>();
  }
  s.normalize = get_or<bool>(j, "normalize", true);
  return s;
}

FamilyOptions parse_family(const Json& j, FamilyOptions f) {
  reject_unknown(j, {"mode", "random_frames", "pca_frames", "floor", "j_min", "j_max", "seed"}, "family");
  if (j.contains("mode")) f.mode = family_mode_from_string(j.at("mode").get<std::string>());
  f.random_frames = get_or<int>(j, "random_frames", f.random_frames);
  f.pca_frames = get_or<int>(j, "pca_frames", f.pca_frames);
  f.floor = get_or<double>(j, "floor", f.floor);
  if (j.contains("j_min")) f.j_min = j.at("j_min").get<int>();
  if (j.contains("j_max")) f.j_max = j.at("j_max").get<int>();
  f.seed = get_or<std::uint64_t>(j, "seed", f.seed);
  return f;
}

}  // namespace

PointMeasure MeasureSource::build() const {
  PointMeasure mu = generator ? generate(*generator) : load_cloud(input);
  if (transform) mu = pushforward(mu, *transform);
  if (slice_axis) {
    const int axis = *slice_axis;
    if (axis < 0 || axis >= mu.dim()) throw ConfigError("slice axis out of range");
    const double bound = slice_max;
    mu = restrict_normalize(mu, [&](const auto& y) { return std::abs(y(axis)) <= bound; });
  }
  if (normalize) {
    const double m = mu.mass();
    if (!(m > 0.0)) throw ConfigError("measure has zero mass");
    mu = PointMeasure(mu.points(), mu.weights() / m);
  }
  return mu;
}

MeasureSource MeasureSource::with_count(int count) const {
  if (!generator) throw ConfigError("point-count refinement needs a generated measure");
  MeasureSource s = *this;
  s.generator->count = count;
  s.generator->params.erase("grid");
  return s;
}

bool ScenarioConfig::wants(const std::string& group) const {
  return checks.empty() || std::find(checks.begin(), checks.end(), group) != checks.end();
}

const std::vector<std::string>& check_groups() {
  static const std::vector<std::string> groups{
      "mainst", "maincor", "rwt", "cauchy_schwarz", "gaussian", "layer_cake",
      "slab", "maximal", "curvature_refinement", "admissibility"};
  return groups;
}

ScenarioConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  reject_unknown(j,
                 {"name", "generator", "input", "transform", "slice", "normalize", "k", "alpha", "gamma",
                  "eps_grid", "family", "budgets", "seed", "checks", "expected_fail", "timings", "mainst",
                  "maincor", "rwt", "cauchy_schwarz", "gaussian", "curvature_refinement", "admissibility",
                  "maximal"},
                 "scenario");
  ScenarioConfig c;
  c.raw = j;
  c.name = get_or<std::string>(j, "name", c.name);
  c.source = parse_source(j);
  c.k = get_or<int>(j, "k", c.k);
  c.alpha = get_or<double>(j, "alpha", c.alpha);
  c.gamma = get_or<double>(j, "gamma", c.gamma);
  c.eps_grid = get_or<std::vector<double>>(j, "eps_grid", c.eps_grid);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.timings = get_or<bool>(j, "timings", c.timings);
  c.family.seed = c.seed;
  if (j.contains("family")) c.family = parse_family(j.at("family"), c.family);
  if (j.contains("budgets")) {
    const auto& b = j.at("budgets");
    reject_unknown(b, {"exact_tuples", "refine", "starts"}, "budgets");
    c.exact_tuples = get_or<std::int64_t>(b, "exact_tuples", c.exact_tuples);
    c.refine.budget = get_or<int>(b, "refine", c.refine.budget);
    c.refine.starts = get_or<int>(b, "starts", c.refine.starts);
  }
  c.checks = get_or<std::vector<std::string>>(j, "checks", {});
  for (const auto& name : c.checks) {
    const auto& groups = check_groups();
    if (std::find(groups.begin(), groups.end(), name) == groups.end()) {
      throw ConfigError("unknown check '" + name + "'");
    }
  }
  for (const auto& name : get_or<std::vector<std::string>>(j, "expected_fail", {})) c.expected_fail.insert(name);

  if (j.contains("mainst")) c.mainst_slack = get_or<double>(j.at("mainst"), "slack", c.mainst_slack);
  if (j.contains("maincor")) {
    for (const auto& m : j.at("maincor").value("measures", Json::array())) c.maincor_sources.push_back(parse_source(m));
  }
  if (j.contains("rwt")) {
    c.rwt_trials = get_or<int>(j.at("rwt"), "trials", c.rwt_trials);
    c.rwt_slack = get_or<double>(j.at("rwt"), "slack", c.rwt_slack);
  }
  if (j.contains("cauchy_schwarz")) c.cs_families = get_or<int>(j.at("cauchy_schwarz"), "families", c.cs_families);
  if (j.contains("gaussian")) c.gaussian_forms = get_or<int>(j.at("gaussian"), "forms", c.gaussian_forms);
  if (j.contains("curvature_refinement")) {
    const auto& r = j.at("curvature_refinement");
    c.refinement_counts = get_or<std::vector<int>>(r, "counts", {});
    c.refinement_factor = get_or<double>(r, "factor", c.refinement_factor);
  }
  if (j.contains("admissibility")) {
    c.admissibility_threshold = get_or<double>(j.at("admissibility"), "threshold", c.admissibility_threshold);
    c.admissibility_trials = get_or<std::int64_t>(j.at("admissibility"), "trials", c.admissibility_trials);
  }
  c.maximal_family.seed = c.seed;
  if (j.contains("maximal")) {
    c.maximal_p = get_or<double>(j.at("maximal"), "p", c.maximal_p);
    if (j.at("maximal").contains("family")) {
      c.maximal_family = parse_family(j.at("maximal").at("family"), c.maximal_family);
    }
  }

  if (c.k < 1) throw ConfigError("k must be positive");
  if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (c.eps_grid.empty()) throw ConfigError("eps_grid must not be empty");
  for (std::size_t i = 0; i < c.eps_grid.size(); ++i) {
    if (!(c.eps_grid[i] > 0.0 && c.eps_grid[i] <= 1.0)) throw ConfigError("eps_grid values must lie in (0, 1]");
    if (i > 0 && !(c.eps_grid[i] > c.eps_grid[i - 1])) throw ConfigError("eps_grid must be strictly ascending");
  }
  if (c.wants("rwt") && !(c.gamma > 0.0 && c.gamma < c.alpha)) {
    throw ConfigError("rwt needs 0 < gamma < alpha");
  }
  if (c.maximal_family.mode != FamilyMode::doubling_dyadic) {
    throw ConfigError("the maximal-function family must be doubling_dyadic");
  }
  if (!(c.maximal_p > 0.0)) throw ConfigError("maximal.p must be positive");
  return c;
}

std::vector<std::string> bundled_scenario_names() {
  return {"lebesgue-cube-d2-k2", "flat-subspace-negative", "sphere-pushforward-d3"};
}

Json bundled_scenario(const std::string& name) {
  if (name == "lebesgue-cube-d2-k2") return Json::parse(kCubeScenario);
  if (name == "flat-subspace-negative") return Json::parse(kFlatScenario);
  if (name == "sphere-pushforward-d3") return Json::parse(kSphereScenario);
  throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioConfig load_config(const std::string& path_or_name) {
  if (std::filesystem::is_regular_file(path_or_name)) {
    std::ifstream in(path_or_name);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError("cannot parse '" + path_or_name + "': " + e.what());
    }
    return parse_config(j);
  }
  return parse_config(bundled_scenario(path_or_name));
}

}  // namespace detcurve
