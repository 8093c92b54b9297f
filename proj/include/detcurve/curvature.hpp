#pragma once

// Curvature constants of discrete measures over finite families of centered
// ellipsoids, plus the Gaussian, slab and maximal-function criteria.
//
// A finite family only sees part of the supremum over all ellipsoids, so
// every estimate here is a certified lower bound (for suprema) or upper
// bound (for infima), always returned together with its witness.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "detcurve/measure.hpp"

namespace detcurve {

enum class FamilyMode {
  scale_floored_search,  ///< semi-lengths 2^j above a floor, plus the floor itself
  doubling_dyadic,       ///< semi-lengths exactly 2^j, j in [j_min, j_max]
};

std::string to_string(FamilyMode mode);
FamilyMode family_mode_from_string(const std::string& name);

/// Centered ellipsoids F diag(l) F^T: every frame combined with every
/// d-tuple of semi-lengths from `lengths`.
struct EllipsoidFamily {
  FamilyMode mode = FamilyMode::scale_floored_search;
  std::vector<MatrixX<double>> frames;
  std::vector<double> lengths;  ///< ascending
  std::vector<int> exponents;   ///< log2 of each length; the floor gets INT_MIN in search mode
  double floor = 0.0;

  Index dim() const { return frames.empty() ? 0 : frames.front().rows(); }
  /// Length tuples per frame: lengths.size()^dim.
  std::int64_t shapes_per_frame() const;
  std::int64_t size() const { return static_cast<std::int64_t>(frames.size()) * shapes_per_frame(); }

  /// Length indices of shape `s` (base lengths.size() digits, axis 0 first).
  std::vector<int> shape_indices(std::int64_t s) const;
  Ellipsoidd member(std::int64_t index) const;

  /// Doubling mode: 2B is also a member (no axis at the largest length).
  bool in_core(std::int64_t index) const;
};

struct FamilyOptions {
  FamilyMode mode = FamilyMode::scale_floored_search;
  int random_frames = 64;
  int pca_frames = 16;
  /// Minimal semi-length; negative means the median nearest-neighbour distance.
  double floor = -1.0;
  /// Dyadic range; unset bounds default to j_max = ceil(log2 max|x|) + 1 and
  /// j_min = the smallest j with 2^j >= floor (j_max - 12 when the floor is 0).
  std::optional<int> j_min;
  std::optional<int> j_max;
  std::uint64_t seed = 1;
};

/// Frames: the coordinate frame, PCA frames of random atom subsets and Haar
/// random rotations, in that order.
EllipsoidFamily make_family(const PointMeasure& mu, const FamilyOptions& options);

/// Haar-distributed rotation (orthogonal, determinant +1).
MatrixX<double> random_rotation(Index d, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Curvature constant
// ---------------------------------------------------------------------------

/// mu(B) / |B|_k^alpha with 0/0 = 0 and m/0 = +inf.
double curvature_ratio(const PointMeasure& mu, const Ellipsoidd& b, int k, double alpha);

struct RefineOptions {
  int starts = 8;       ///< best family members used as starting points
  int budget = 0;       ///< ratio evaluations per start; 0 disables local search
};

struct CurvatureEstimate {
  int k = 0;
  double alpha = 0.0;
  double constant = 0.0;       ///< curvature_ratio of the witness
  double family_constant = 0.0;  ///< maximum over the family before refinement
  Ellipsoidd witness;
  std::int64_t witness_index = -1;  ///< family index, -1 when refinement moved it
  std::int64_t family_size = 0;
  std::int64_t evaluations = 0;
};

/// Lower bound for sup_B mu(B) / |B|_k^alpha over centered ellipsoids. With
/// refinement, each start is first rescaled to its best admissible scale
/// (every semi-length at least the floor) and then improved by axis-wise
/// 2^(+-1/4) steps and Givens rotations, accepting only improvements.
CurvatureEstimate estimate_curvature_constant(const PointMeasure& mu, int k, double alpha,
                                              const EllipsoidFamily& family,
                                              const RefineOptions& refine = {});

struct ContentWitness {
  double delta_hat = 0.0;  ///< k-content of the witness
  Ellipsoidd witness;
};

/// Upper bound for inf { |B|_k : B centered, mu(B) >= eps }. Each family
/// member only contributes its shape: it is scaled to the smallest multiple
/// that reaches mass eps. The floor is ignored.
ContentWitness min_content_at_mass(const PointMeasure& mu, int k, double eps,
                                   const EllipsoidFamily& family, const RefineOptions& refine = {});

// ---------------------------------------------------------------------------
// Gaussian testing
// ---------------------------------------------------------------------------

/// sum_i w_i exp(-||Q p_i - x0||^2).
double gaussian_integral(const PointMeasure& mu, const MatrixX<double>& q, const VectorX<double>& x0);

/// Random Q = U diag(s) V^T with Haar U, V and log2 s uniform in
/// [log2 lo, log2 hi].
MatrixX<double> random_form(Index d, double lo, double hi, std::mt19937_64& rng);

struct LayerCakeResult {
  double lhs = 0.0;  ///< gaussian_integral(mu, Q, 0)
  double rhs = 0.0;  ///< 2 int_0^inf t e^(-t^2) mu(||Qx|| <= t) dt, piecewise exact
  double rel_err = 0.0;
};

LayerCakeResult layer_cake_check(const PointMeasure& mu, const MatrixX<double>& q);

/// sum_j (e^(-4^(j-1)) - e^(-4^j)) 2^(j k alpha), the factor relating the
/// Gaussian integral to the dyadic ellipsoid ratios of B_Q.
double gaussian_content_constant(int k, double alpha);

struct GaussianContentResult {
  double integral = 0.0;
  double content = 0.0;          ///< |Q|_k
  double dyadic_constant = 0.0;  ///< max_j mu(2^j B_Q) / |2^j B_Q|_k^alpha
  double bound = 0.0;            ///< gaussian_content_constant * dyadic_constant * |Q|_k^alpha
  double lower = 0.0;            ///< e^-1 mu(B_Q)
  bool ok = false;               ///< lower <= integral <= bound
};

GaussianContentResult gaussian_content_check(const PointMeasure& mu, const MatrixX<double>& q, int k,
                                             double alpha);

// ---------------------------------------------------------------------------
// Slabs
// ---------------------------------------------------------------------------

/// sup over the subspaces and over the distinct positive atom distances delta
/// of mu(dist(y, H) <= delta) / delta^(alpha k); +inf if some subspace
/// carries mass.
double slab_constant(const PointMeasure& mu, int k, double alpha,
                     const std::vector<AffineSubspace<double>>& subspaces);

struct SlabImplicationResult {
  double slab_constant = 0.0;
  std::int64_t members = 0;
  std::int64_t violations = 0;
  double worst_ratio = 0.0;  ///< max mu(B) / (C l_k^(alpha k)) over the family
};

/// Measures the slab constant over the top-(k-1) axis spans of the family
/// and checks mu(B) <= C l_k(B)^(alpha k) <= C |B|_k^alpha for every member.
SlabImplicationResult slab_implication_check(const PointMeasure& mu, int k, double alpha,
                                             const EllipsoidFamily& family);

// ---------------------------------------------------------------------------
// Maximal function
// ---------------------------------------------------------------------------

/// sup over members B of mu(y + B) / |B|_k^alpha at each column y of
/// `eval_points`. With core_only, only members whose double is also in the
/// family take part.
std::vector<double> maximal_function(const PointMeasure& mu, int k, double alpha,
                                     const EllipsoidFamily& family, const MatrixX<double>& eval_points,
                                     bool core_only = false);

/// (sup_lambda lambda^p mu(|f| > lambda))^(1/p) for a function taking
/// value values[i] with mass weights[i].
double weak_lp_norm(const std::vector<double>& values, const std::vector<double>& weights, double p);

struct MaximalInequalityResult {
  double lhs = 0.0;  ///< sup over atoms of F_{k, alpha p/(p+1)} on the core
  double rhs = 0.0;  ///< 2^(alpha k) ||F_{k,alpha}||_{p,inf}^(p/(p+1)) on the full family
  double weak_norm = 0.0;
  bool ok = false;
};

MaximalInequalityResult maximal_inequality_check(const PointMeasure& mu, int k, double alpha, double p,
                                                 const EllipsoidFamily& family);

}  // namespace detcurve
