#pragma once

// Determinant functionals on discrete measures.
//
//   T(f_1..f_{k+1})  = sum over (k+1)-tuples of prod f_j(y_j) w_j * det(y_1..y_{k+1})^(-gamma)
//   T~(f_1..f_k)     = the same with the last point pinned at the origin
//   I^delta(mu_1..)  = product mass of { 0 < det(0, y_1..y_k) < delta }
//
// Tuples whose determinant is at most tau_det are degenerate: they are
// excluded from every sum and reported separately.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "detcurve/measure.hpp"

namespace detcurve {

struct FunctionalOptions {
  /// Degeneracy threshold; negative means 1e-12 * scale^k, where scale is
  /// the largest atom norm (origin-pinned functionals) or the bounding-box
  /// diagonal (evaluate_T, which must not depend on the origin).
  double tau_det = -1.0;
  /// Maximum number of tuples enumerated exactly.
  std::int64_t budget = 10'000'000;
  /// Enumerate sorted index tuples when every factor is the same measure.
  bool use_symmetry = true;
};

/// Value of a functional together with its tuple bookkeeping. Tuples are
/// counted over atoms with positive factor mass only.
struct FunctionalResult {
  double value = 0.0;
  std::int64_t tuples_total = 0;
  std::int64_t tuples_excluded = 0;
  double included_mass = 0.0;  ///< sum of prod f_j w_j over non-degenerate tuples
  double excluded_mass = 0.0;  ///< the same over degenerate tuples
  std::optional<double> std_error;  ///< sampled estimates only
};

/// T with kernel det^(-gamma); gamma < 0 gives the positive-power functional.
/// fs holds k+1 per-atom factor vectors aligned with mu's atoms.
FunctionalResult evaluate_T(const PointMeasure& mu, int k, double gamma,
                            const std::vector<VectorX<double>>& fs,
                            const FunctionalOptions& options = {});

/// T~ with y_{k+1} = 0; fs holds k factor vectors.
FunctionalResult evaluate_T_tilde(const PointMeasure& mu, int k, double gamma,
                                  const std::vector<VectorX<double>>& fs,
                                  const FunctionalOptions& options = {});

/// I^delta(mu_1, ..., mu_k) with k = mus.size(). The measures are expected to
/// be probability measures; the product mass is returned unnormalised.
double sublevel_I(const std::vector<PointMeasure>& mus, double delta,
                  const FunctionalOptions& options = {});

/// Unbiased estimate of evaluate_T from uniformly sampled index tuples.
FunctionalResult monte_carlo_T(const PointMeasure& mu, int k, double gamma,
                               const std::vector<VectorX<double>>& fs, std::int64_t samples,
                               std::uint64_t seed, const FunctionalOptions& options = {});

/// Atom-index sets E_1..E_k.
using SetFamily = std::vector<std::vector<Index>>;

/// 0/1 factor vector of `set`; the weights are applied by the functional.
VectorX<double> indicator(const PointMeasure& mu, const std::vector<Index>& set);

double set_mass(const PointMeasure& mu, const std::vector<Index>& set);

/// Product mass of E_1 x ... x E_k split into dyadic layers
/// { 2^l <= det(0, y) < 2^(l+1) }.
struct DyadicProfile {
  std::map<int, double> layers;
  double gamma = 0.0;
  int l_min = 0;
  int l_max = -1;
  double included_mass = 0.0;
  double excluded_mass = 0.0;

  /// sum_l 2^(-gamma l) * layers[l].
  double reconstruct() const;
  /// Interval that must contain T~ over the same sets: the reconstruction
  /// and the reconstruction times 2^(-gamma), in increasing order.
  std::pair<double, double> bracket() const;
};

DyadicProfile dyadic_profile(const PointMeasure& mu, int k, const SetFamily& sets, double gamma,
                             const FunctionalOptions& options = {});

struct CauchySchwarzResult {
  double lhs = 0.0;              ///< (included product mass)^2
  double rhs = 0.0;              ///< (sum det^gamma) * (sum det^-gamma)
  bool ok = false;               ///< lhs <= rhs * (1 + 1e-12)
  double included_mass = 0.0;
  double positive_moment = 0.0;
  double negative_moment = 0.0;
};

CauchySchwarzResult cauchy_schwarz_check(const PointMeasure& mu, int k, double gamma,
                                         const SetFamily& sets,
                                         const FunctionalOptions& options = {});

// ---------------------------------------------------------------------------
// Restricted weak-type probing
// ---------------------------------------------------------------------------

enum class SetSampler { random_subset, ball, halfspace, ellipsoid_shell, mixed };

std::string to_string(SetSampler sampler);
SetSampler set_sampler_from_string(const std::string& name);

/// T~(chi_E1..chi_Ek) / prod mu(E_j)^(1 - gamma/(k alpha)).
double rwt_ratio(const PointMeasure& mu, int k, double gamma, double alpha, const SetFamily& sets,
                 const FunctionalOptions& options = {});

struct RwtProbeResult {
  double sup_ratio = 0.0;
  std::string witness_kind;
  SetFamily witness_sets;
  double witness_lhs = 0.0;
  double witness_rhs = 0.0;
  int trials = 0;
};

/// Largest rwt_ratio over `trials` seeded set families drawn by `sampler`.
RwtProbeResult rwt_probe(const PointMeasure& mu, int k, double gamma, double alpha,
                         SetSampler sampler, int trials, std::uint64_t seed,
                         const FunctionalOptions& options = {});

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// c_k = 2^(-(k-1)(k+2)/2): scale applied to the content threshold.
double sublevel_scale_constant(int k);
/// C_k = 4^(k-1) k!: bound on I^(c_k delta) in units of eps.
double sublevel_mass_constant(int k);
/// (k^k / k!) C_k: the multilinear version with k distinct measures.
double corollary_mass_constant(int k);

/// C_{k,alpha,gamma} such that
///   T~(chi_E1..chi_Ek) <= C ||mu||_0^(gamma/alpha) prod mu(E_j)^(1 - gamma/(k alpha))
/// whenever mu(B) <= ||mu||_0 |B|_k^alpha on centered ellipsoids.
///
/// Layer l = { 2^l <= det < 2^(l+1) } has mass at most
///   min(P, K 2^(alpha (l+1)) P^(1 - 1/k)),   P = prod mu(E_j),
///   K = (k^k/k!) C_k c_k^(-alpha) ||mu||_0,
/// and contributes at most 2^(-gamma l) times its mass. Summing the second
/// bound for l < l0 and the first for l >= l0 gives
///   S(l0) = a 2^((alpha-gamma) l0) + b 2^(-gamma l0)
/// with a = K 2^alpha P^(1-1/k) / (2^(alpha-gamma) - 1), b = P / (1 - 2^-gamma).
/// The continuous minimum is (alpha/(alpha-gamma)) b^(1-gamma/alpha)
/// ((alpha-gamma) a / gamma)^(gamma/alpha); rounding l0 to an integer costs at
/// most a factor 2^(alpha-gamma), which is folded into the constant.
double rwt_series_constant(int k, double alpha, double gamma);

/// min over integer l0 of S(l0) above for given ||mu||_0 and P.
double rwt_crossover_bound(int k, double alpha, double gamma, double curvature_constant,
                           double set_mass_product);

}  // namespace detcurve
