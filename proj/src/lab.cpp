#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "detcurve/lab.hpp"

namespace detcurve {
namespace {

std::string key(const std::string& prefix, double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s.eps=%g", prefix.c_str(), eps);
  return buf;
}

FunctionalOptions exact_options(std::int64_t budget) {
  FunctionalOptions o;
  o.budget = budget;
  return o;
}

// Smallest r with mu(|y| <= r) >= eps.
double radius_quantile(const PointMeasure& mu, double eps) {
  std::vector<std::pair<double, double>> rw;
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) > 0.0) rw.emplace_back(mu.point(i).norm(), mu.weight(i));
  }
  std::sort(rw.begin(), rw.end());
  double cum = 0.0;
  for (std::size_t i = 0; i < rw.size(); ++i) {
    cum += rw[i].second;
    if (i + 1 < rw.size() && rw[i + 1].first == rw[i].first) continue;
    if (cum >= eps * (1.0 - 1e-12)) return rw[i].first;
  }
  return rw.empty() ? 0.0 : rw.back().first;
}

SetFamily random_sets(const PointMeasure& mu, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SetFamily sets;
  for (int j = 0; j < k; ++j) {
    const double q = 0.05 + 0.95 * unit(rng);
    std::vector<Index> set;
    for (Index i = 0; i < mu.size(); ++i) {
      if (unit(rng) < q) set.push_back(i);
    }
    if (set.empty()) set.push_back(static_cast<Index>(unit(rng) * static_cast<double>(mu.size())));
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<MatrixX<double>> random_forms(const PointMeasure& mu, int count, std::uint64_t seed) {
  const double reach = std::max(max_radius(mu), 1e-12);
  double spacing = median_nearest_neighbor(mu);
  if (!(spacing > 0.0)) spacing = reach / 256.0;
  std::mt19937_64 rng(seed);
  std::vector<MatrixX<double>> forms;
  for (int i = 0; i < count; ++i) forms.push_back(random_form(mu.dim(), 0.25 / reach, 2.0 / spacing, rng));
  return forms;
}

}  // namespace

Section verify_mainst(const PointMeasure& mu, int k, const std::vector<double>& eps_grid,
                      const EllipsoidFamily& family, const RefineOptions& refine, double slack,
                      std::int64_t budget) {
  Section s;
  const double c_k = sublevel_scale_constant(k);
  const double big_c = sublevel_mass_constant(k);

  // c_j = 2^-j c_(j-1) and C_j = 4 j C_(j-1): exact in binary floating point.
  double c_dev = 0.0;
  double big_dev = 0.0;
  for (int j = 2; j <= std::max(k, 3); ++j) {
    c_dev = std::max(c_dev, std::abs(sublevel_scale_constant(j) - std::exp2(-j) * sublevel_scale_constant(j - 1)));
    big_dev = std::max(big_dev, std::abs(sublevel_mass_constant(j) - 4.0 * j * sublevel_mass_constant(j - 1)));
  }
  s.checks.push_back(make_check("mainst.c_recursion", "<=", c_dev, 0.0, "|c_j - 2^-j c_(j-1)|, j <= max(k,3)"));
  s.checks.push_back(make_check("mainst.C_recursion", "<=", big_dev, 0.0, "|C_j - 4 j C_(j-1)|, j <= max(k,3)"));

  const FunctionalOptions options = exact_options(budget);
  for (double eps : eps_grid) {
    // k = 1: the infimum is the eps-quantile radius and the bound is exact.
    const double r = radius_quantile(mu, eps);
    const double i1 = sublevel_I({mu}, r, options);
    s.checks.push_back(make_check(key("mainst.k1", eps), "<=", i1, eps, "mu(0 < |y| < r_eps) <= eps"));
  }
  for (double eps : eps_grid) {
    const auto w = min_content_at_mass(mu, k, eps, family, refine);
    const double delta = c_k * w.delta_hat;
    const double value = sublevel_I(std::vector<PointMeasure>(static_cast<std::size_t>(k), mu), delta, options);
    s.measured[key("mainst.delta_hat", eps)] = w.delta_hat;
    s.measured[key("mainst.I", eps)] = value;
    s.checks.push_back(make_check(key("mainst", eps), "<=", value, slack * big_c * eps,
                                  "I(c_k delta_hat) <= slack C_k eps; delta_hat is an upper bound"));
  }
  return s;
}

Section verify_maincor(const std::vector<PointMeasure>& mus, const std::vector<double>& eps_grid,
                       const FamilyOptions& family, const RefineOptions& refine, std::int64_t budget) {
  Section s;
  const int k = static_cast<int>(mus.size());
  std::vector<EllipsoidFamily> families;
  for (const auto& mu : mus) families.push_back(make_family(mu, family));
  const FunctionalOptions options = exact_options(budget);
  for (double eps : eps_grid) {
    double delta = sublevel_scale_constant(k);
    for (std::size_t i = 0; i < mus.size(); ++i) {
      const auto w = min_content_at_mass(mus[i], k, eps, families[i], refine);
      delta *= std::pow(w.delta_hat, 1.0 / k);
    }
    const double value = sublevel_I(mus, delta, options);
    s.measured[key("maincor.delta", eps)] = delta;
    s.measured[key("maincor.I", eps)] = value;
    s.checks.push_back(make_check(key("maincor", eps), "<=", value, corollary_mass_constant(k) * eps,
                                  "I(c_k prod delta_hat_i^(1/k)) <= (k^k/k!) C_k eps"));
  }
  return s;
}

Section verify_rwt(const PointMeasure& mu, int k, double gamma, double alpha, int trials, std::uint64_t seed,
                   double curvature_constant, double slack, std::int64_t budget) {
  Section s;
  const double constant = rwt_series_constant(k, alpha, gamma);
  const auto probe = rwt_probe(mu, k, gamma, alpha, SetSampler::mixed, trials, seed, exact_options(budget));
  const double bound = constant * std::pow(curvature_constant + slack, gamma / alpha);
  s.measured["rwt.series_constant"] = constant;
  s.measured["rwt.curvature_constant"] = curvature_constant;
  s.measured["rwt.sup_ratio"] = probe.sup_ratio;
  s.checks.push_back(make_check("rwt", "<=", probe.sup_ratio, bound,
                                "sup over " + std::to_string(trials) + " set families (witness: " +
                                    probe.witness_kind + ") <= C (M + slack)^(gamma/alpha)"));
  return s;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  ScenarioReport report;
  report.config = config.raw;
  std::map<std::string, double> timings;
  using Clock = std::chrono::steady_clock;

  const PointMeasure mu = config.source.build();
  const int k = config.k;
  if (k > mu.dim()) throw ConfigError("k exceeds the dimension of the measure");
  report.measured["mu.atoms"] = static_cast<double>(mu.size());
  report.measured["mu.dim"] = static_cast<double>(mu.dim());
  report.measured["mu.mass"] = mu.mass();

  const EllipsoidFamily family = make_family(mu, config.family);
  report.measured["family.size"] = static_cast<double>(family.size());
  report.measured["family.floor"] = family.floor;

  std::optional<CurvatureEstimate> curvature;
  auto curvature_estimate = [&]() -> const CurvatureEstimate& {
    if (!curvature) curvature = estimate_curvature_constant(mu, k, config.alpha, family, config.refine);
    return *curvature;
  };

  for (const auto& group : check_groups()) {
    if (!config.wants(group)) continue;
    const auto start = Clock::now();
    Section s;
    if (group == "mainst") {
      s = verify_mainst(mu, k, config.eps_grid, family, config.refine, config.mainst_slack, config.exact_tuples);
    } else if (group == "maincor") {
      std::vector<PointMeasure> mus;
      for (const auto& src : config.maincor_sources) mus.push_back(src.build());
      if (mus.empty()) {
        mus.push_back(mu);
        while (static_cast<int>(mus.size()) < k) mus.push_back(dilate(mu, std::exp2(static_cast<double>(mus.size()))));
      }
      if (static_cast<int>(mus.size()) != k) throw ConfigError("maincor needs exactly k measures");
      s = verify_maincor(mus, config.eps_grid, config.family, config.refine, config.exact_tuples);
    } else if (group == "rwt") {
      s = verify_rwt(mu, k, config.gamma, config.alpha, config.rwt_trials, config.seed,
                     curvature_estimate().constant, config.rwt_slack, config.exact_tuples);
    } else if (group == "cauchy_schwarz") {
      std::mt19937_64 rng(config.seed ^ 0xc5u);
      std::int64_t failures = 0;
      double worst = 0.0;
      for (int f = 0; f < config.cs_families; ++f) {
        const auto r = cauchy_schwarz_check(mu, k, config.gamma, random_sets(mu, k, rng),
                                            exact_options(config.exact_tuples));
        if (!r.ok) ++failures;
        if (r.rhs > 0.0) worst = std::max(worst, r.lhs / r.rhs);
      }
      s.measured["cauchy_schwarz.worst_ratio"] = worst;
      s.checks.push_back(make_check("cauchy_schwarz", "<=", static_cast<double>(failures), 0.0,
                                    "failures of P^2 <= M_gamma M_-gamma (1e-12 relative) over " +
                                        std::to_string(config.cs_families) + " set families"));
    } else if (group == "gaussian" || group == "layer_cake") {
      const auto forms = random_forms(mu, config.gaussian_forms, config.seed ^ 0x9au);
      if (group == "gaussian") {
        std::int64_t lower_fail = 0;
        std::int64_t content_fail = 0;
        double worst_lower = 0.0;
        double worst_content = 0.0;
        for (const auto& q : forms) {
          const auto r = gaussian_content_check(mu, q, k, config.alpha);
          if (!(r.lower <= r.integral)) ++lower_fail;
          if (!(r.integral <= r.bound)) ++content_fail;
          worst_lower = std::max(worst_lower, r.lower / r.integral);
          if (std::isfinite(r.bound) && r.bound > 0.0) worst_content = std::max(worst_content, r.integral / r.bound);
        }
        s.measured["gaussian.constant"] = gaussian_content_constant(k, config.alpha);
        s.measured["gaussian.worst_lower_ratio"] = worst_lower;
        s.measured["gaussian.worst_content_ratio"] = worst_content;
        s.checks.push_back(make_check("gaussian.lower", "<=", static_cast<double>(lower_fail), 0.0,
                                      "failures of e^-1 mu(B_Q) <= int e^-|Qx|^2 (exact)"));
        s.checks.push_back(make_check("gaussian.content", "<=", static_cast<double>(content_fail), 0.0,
                                      "failures of int e^-|Qx|^2 <= C(k,alpha) M_Q |Q|_k^alpha"));
      } else {
        double worst = 0.0;
        for (const auto& q : forms) worst = std::max(worst, layer_cake_check(mu, q).rel_err);
        s.checks.push_back(make_check("layer_cake", "<", worst, 1e-6, "max relative error over random Q"));
      }
    } else if (group == "slab") {
      const auto r = slab_implication_check(mu, k, config.alpha, family);
      s.measured["slab.constant"] = r.slab_constant;
      s.measured["slab.worst_ratio"] = r.worst_ratio;
      s.checks.push_back(make_check("slab", "<=", static_cast<double>(r.violations), 0.0,
                                    "members violating mu(B) <= C l_k^(alpha k) <= C |B|_k^alpha"));
    } else if (group == "maximal") {
      const EllipsoidFamily doubling = make_family(mu, config.maximal_family);
      const auto r = maximal_inequality_check(mu, k, config.alpha, config.maximal_p, doubling);
      s.measured["maximal.family_size"] = static_cast<double>(doubling.size());
      s.measured["maximal.weak_norm"] = r.weak_norm;
      s.checks.push_back(make_check("maximal", "<=", r.lhs, r.rhs,
                                    "sup F_(k, alpha p/(p+1)) <= 2^(alpha k) |F_(k,alpha)|_(p,inf)^(p/(p+1)) "
                                    "on the doubling family"));
    } else if (group == "curvature_refinement") {
      if (config.refinement_counts.size() < 2) continue;
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (int count : config.refinement_counts) {
        const PointMeasure m = config.source.with_count(count).build();
        const auto est = estimate_curvature_constant(m, k, config.alpha, make_family(m, config.family), config.refine);
        s.measured["curvature_refinement.count=" + std::to_string(count)] = est.constant;
        lo = std::min(lo, est.constant);
        hi = std::max(hi, est.constant);
      }
      s.checks.push_back(make_check("curvature_refinement", "<", hi / lo, config.refinement_factor,
                                    "max/min curvature constant across point counts"));
    } else if (group == "admissibility") {
      const double flat = flat_mass_diagnostic(mu, k, config.admissibility_trials, config.seed);
      s.measured["admissibility.flat_mass"] = flat;
      s.checks.push_back(make_check("admissibility", "<", flat, config.admissibility_threshold,
                                    "largest mass on a (k-1)-flat through k atoms"));
    }
    for (auto& c : s.checks) c.expected_fail = config.expected_fail.count(group) != 0;
    report.checks.insert(report.checks.end(), s.checks.begin(), s.checks.end());
    for (const auto& [name, value] : s.measured) report.measured[name] = value;
    timings[group] = std::chrono::duration<double>(Clock::now() - start).count();
  }
  if (curvature) {
    report.measured["curvature.constant"] = curvature->constant;
    report.measured["curvature.family_constant"] = curvature->family_constant;
  }
  if (config.timings) report.timings = std::move(timings);
  return report;
}

}  // namespace detcurve
