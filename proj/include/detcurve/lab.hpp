#pragma once

// Scenario-level verification: configuration, check drivers, and the
// report record with its JSON/CSV serialisation.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "detcurve/curvature.hpp"
#include "detcurve/functionals.hpp"
#include "json.hpp"

namespace detcurve {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "detcurve 0.1.0";

/// One asserted inequality `lhs relation rhs`.
struct Check {
  std::string name;
  std::string relation;  ///< "<=", "<" or ">="
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;   ///< rhs - lhs for upper bounds, lhs - rhs for ">="
  double ratio = 0.0;    ///< lhs / rhs
  bool passed = false;
  bool expected_fail = false;
  std::string note;

  bool operator==(const Check&) const = default;
};

Check make_check(std::string name, std::string relation, double lhs, double rhs, std::string note = {});

/// Checks and measured quantities produced by one verification driver.
struct Section {
  std::vector<Check> checks;
  std::map<std::string, double> measured;

  void append(const Section& other);
};

struct ScenarioReport {
  Json config;
  std::map<std::string, double> measured;
  std::vector<Check> checks;
  std::optional<std::map<std::string, double>> timings;
  std::string version = kVersion;

  /// True when every check fails exactly if it is expected to.
  bool ok() const;
  bool operator==(const ScenarioReport&) const = default;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Where a scenario's measure comes from, and what is done to it.
struct MeasureSource {
  std::optional<GeneratorSpec> generator;
  std::string input;                    ///< cloud file, used when no generator
  std::optional<MatrixX<double>> transform;  ///< push-forward by this matrix
  std::optional<int> slice_axis;        ///< keep |x_axis| <= slice_max, renormalised
  double slice_max = 0.0;
  bool normalize = true;                ///< rescale weights to total mass 1

  PointMeasure build() const;
  /// The same source with the generator's point count replaced.
  MeasureSource with_count(int count) const;
};

/// Doubling family used by the maximal-function check: few frames, since
/// every member is evaluated at every atom.
inline FamilyOptions doubling_defaults() {
  FamilyOptions f;
  f.mode = FamilyMode::doubling_dyadic;
  f.random_frames = 4;
  f.pca_frames = 2;
  return f;
}

struct ScenarioConfig {
  std::string name = "scenario";
  MeasureSource source;
  int k = 2;
  double alpha = 1.0;
  double gamma = 0.5;
  std::vector<double> eps_grid{0.1, 0.2, 0.4};
  FamilyOptions family;
  RefineOptions refine{8, 120};
  std::int64_t exact_tuples = 20'000'000;
  std::uint64_t seed = 1;
  std::vector<std::string> checks;        ///< empty: every check
  std::set<std::string> expected_fail;    ///< check groups that must fail
  bool timings = false;

  double mainst_slack = 1.0;
  std::vector<MeasureSource> maincor_sources;  ///< empty: mu and its dilate by 2
  int rwt_trials = 100;
  double rwt_slack = 0.0;
  int cs_families = 50;
  int gaussian_forms = 20;
  std::vector<int> refinement_counts;
  double refinement_factor = 2.0;
  double admissibility_threshold = 0.5;
  std::int64_t admissibility_trials = 20000;
  double maximal_p = 1.0;
  FamilyOptions maximal_family = doubling_defaults();

  Json raw;  ///< the JSON this config was read from

  bool wants(const std::string& group) const;
};

/// Every check group run_scenario knows, in execution order.
const std::vector<std::string>& check_groups();

ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::string& path_or_name);

std::vector<std::string> bundled_scenario_names();
/// JSON text of a bundled scenario; throws ConfigError for unknown names.
Json bundled_scenario(const std::string& name);

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

/// sublevel_I(mu..mu; c_k delta_hat(eps)) <= slack C_k eps for each eps,
/// plus the constant identities and the exact k = 1 case.
Section verify_mainst(const PointMeasure& mu, int k, const std::vector<double>& eps_grid,
                      const EllipsoidFamily& family, const RefineOptions& refine, double slack,
                      std::int64_t budget);

/// sublevel_I(mu_1..mu_k; c_k a_1..a_k) <= (k^k/k!) C_k eps with
/// a_i = delta_hat_i(eps)^(1/k).
Section verify_maincor(const std::vector<PointMeasure>& mus, const std::vector<double>& eps_grid,
                       const FamilyOptions& family, const RefineOptions& refine, std::int64_t budget);

/// Probed sup of the restricted weak-type ratio against
/// C_{k,alpha,gamma} (curvature_constant + slack)^(gamma/alpha).
Section verify_rwt(const PointMeasure& mu, int k, double gamma, double alpha, int trials,
                   std::uint64_t seed, double curvature_constant, double slack, std::int64_t budget);

ScenarioReport run_scenario(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

Json report_to_json(const ScenarioReport& report);
ScenarioReport report_from_json(const Json& j);
std::string report_to_csv(const ScenarioReport& report);

/// Writes `report` as "json" or "csv" to `path` ("-" for stdout).
void emit_report(const ScenarioReport& report, const std::string& format, const std::string& path);

}  // namespace detcurve
