#pragma once

// Finite weighted point measures and the exact transformations applied to
// them: restriction, normalisation, dilation, push-forward, mixtures and the
// mass-exact radial split.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "detcurve/errors.hpp"
#include "detcurve/geometry.hpp"

namespace detcurve {

/// Atoms are the columns of `points()`; weights are nonnegative masses.
/// Zero weights are allowed (they arise from radial splits) and are simply
/// outside the support.
template <typename Scalar>
class WeightedPointMeasure {
 public:
  WeightedPointMeasure() = default;

  WeightedPointMeasure(MatrixX<Scalar> points, VectorX<Scalar> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.cols() < 1 || points_.rows() < 1) {
      throw std::invalid_argument("measure needs at least one atom of positive dimension");
    }
    if (weights_.size() != points_.cols()) {
      throw DimensionError("measure: weight count does not match point count");
    }
    if (!points_.allFinite()) throw std::invalid_argument("measure: non-finite coordinate");
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_(i) >= Scalar(0)) || !std::isfinite(weights_(i))) {
        throw std::invalid_argument("measure: weights must be finite and nonnegative");
      }
    }
  }

  /// Equal weights summing to one.
  static WeightedPointMeasure uniform(MatrixX<Scalar> points) {
    const Index n = points.cols();
    return WeightedPointMeasure(std::move(points), VectorX<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
  }

  Index dim() const { return points_.rows(); }
  Index size() const { return points_.cols(); }
  const MatrixX<Scalar>& points() const { return points_; }
  const VectorX<Scalar>& weights() const { return weights_; }
  auto point(Index i) const { return points_.col(i); }
  Scalar weight(Index i) const { return weights_(i); }
  Scalar mass() const { return weights_.sum(); }

  /// Same atoms with zero-weight atoms removed.
  WeightedPointMeasure support() const {
    std::vector<Index> keep;
    for (Index i = 0; i < size(); ++i) {
      if (weights_(i) > Scalar(0)) keep.push_back(i);
    }
    if (keep.empty()) keep.push_back(0);
    return subset(keep);
  }

  WeightedPointMeasure subset(const std::vector<Index>& indices) const {
    MatrixX<Scalar> p(dim(), static_cast<Index>(indices.size()));
    VectorX<Scalar> w(static_cast<Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
      p.col(static_cast<Index>(j)) = points_.col(indices[j]);
      w(static_cast<Index>(j)) = weights_(indices[j]);
    }
    return WeightedPointMeasure(std::move(p), std::move(w));
  }

  bool operator==(const WeightedPointMeasure& other) const {
    return points_.rows() == other.points_.rows() && points_.cols() == other.points_.cols() &&
           points_ == other.points_ && weights_ == other.weights_;
  }

 private:
  MatrixX<Scalar> points_;
  VectorX<Scalar> weights_;
};

using PointMeasure = WeightedPointMeasure<double>;

// ---------------------------------------------------------------------------
// Evaluation and transformations
// ---------------------------------------------------------------------------

/// mu(region): total weight of the atoms satisfying `region`.
template <typename Scalar, typename Region>
Scalar eval_measure(const WeightedPointMeasure<Scalar>& mu, Region&& region) {
  Scalar total(0);
  for (Index i = 0; i < mu.size(); ++i) {
    if (region(mu.point(i))) total += mu.weight(i);
  }
  return total;
}

template <typename Scalar>
Scalar eval_measure(const WeightedPointMeasure<Scalar>& mu, const Ellipsoid<Scalar>& b) {
  return eval_measure(mu, [&](const auto& y) { return ellipsoid_contains(b, y); });
}

/// mu restricted to `region` and renormalised to mass one.
template <typename Scalar, typename Region>
WeightedPointMeasure<Scalar> restrict_normalize(const WeightedPointMeasure<Scalar>& mu,
                                                Region&& region) {
  std::vector<Index> keep;
  Scalar total(0);
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) > Scalar(0) && region(mu.point(i))) {
      keep.push_back(i);
      total += mu.weight(i);
    }
  }
  if (!(total > Scalar(0))) {
    throw std::invalid_argument("restrict_normalize: region has zero mass");
  }
  WeightedPointMeasure<Scalar> sub = mu.subset(keep);
  return WeightedPointMeasure<Scalar>(sub.points(), sub.weights() / total);
}

/// Isotropic dilation: atoms scaled by a, weights unchanged.
template <typename Scalar>
WeightedPointMeasure<Scalar> dilate(const WeightedPointMeasure<Scalar>& mu, Scalar a) {
  if (!(a > Scalar(0))) throw std::invalid_argument("dilate: factor must be positive");
  return WeightedPointMeasure<Scalar>(a * mu.points(), mu.weights());
}

template <typename Scalar, typename Derived>
WeightedPointMeasure<Scalar> translate(const WeightedPointMeasure<Scalar>& mu,
                                       const Eigen::MatrixBase<Derived>& shift) {
  if (shift.size() != mu.dim()) throw DimensionError("translate: dimension mismatch");
  MatrixX<Scalar> p = mu.points();
  p.colwise() += shift;
  return WeightedPointMeasure<Scalar>(std::move(p), mu.weights());
}

/// Image of mu under the linear map `map` (target_dim x dim).
template <typename Scalar, typename Derived>
WeightedPointMeasure<Scalar> pushforward(const WeightedPointMeasure<Scalar>& mu,
                                         const Eigen::MatrixBase<Derived>& map) {
  if (map.cols() != mu.dim() || map.rows() < 1) {
    throw DimensionError("pushforward: map shape does not match measure dimension");
  }
  return WeightedPointMeasure<Scalar>(map * mu.points(), mu.weights());
}

/// sum_i coeffs[i] * measures[i], as the concatenation of scaled atoms.
template <typename Scalar>
WeightedPointMeasure<Scalar> mixture(const std::vector<WeightedPointMeasure<Scalar>>& measures,
                                     const std::vector<Scalar>& coeffs) {
  if (measures.empty() || measures.size() != coeffs.size()) {
    throw std::invalid_argument("mixture: need one coefficient per measure");
  }
  const Index d = measures.front().dim();
  Index n = 0;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    if (measures[i].dim() != d) throw DimensionError("mixture: dimension mismatch");
    if (!(coeffs[i] >= Scalar(0))) throw std::invalid_argument("mixture: negative coefficient");
    n += measures[i].size();
  }
  MatrixX<Scalar> p(d, n);
  VectorX<Scalar> w(n);
  Index offset = 0;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const Index m = measures[i].size();
    p.middleCols(offset, m) = measures[i].points();
    w.segment(offset, m) = coeffs[i] * measures[i].weights();
    offset += m;
  }
  return WeightedPointMeasure<Scalar>(std::move(p), std::move(w));
}

/// Result of the radial split of a probability measure at mass eps.
template <typename Scalar>
struct RadialSplit {
  WeightedPointMeasure<Scalar> outer;  ///< mass eps, supported in { |x| >= radius }
  WeightedPointMeasure<Scalar> inner;  ///< the remainder, mass 1 - eps
  Scalar radius;                       ///< r0
};

/// Splits a mass-one measure into the heaviest-radius part of mass exactly
/// eps and the remainder. Both parts live on the atoms of `mu` (zero
/// weights allowed) so that outer.weights() + inner.weights() == mu.weights().
///
/// r0 is the largest r with mu(|x| >= r) >= eps. Atoms at radius exactly r0
/// are split by a common fraction: the convex combination of the
/// restrictions to { |x| >= r0 } and { |x| > r0 }.
template <typename Scalar>
RadialSplit<Scalar> radial_split(const WeightedPointMeasure<Scalar>& mu, Scalar eps) {
  if (!(eps > Scalar(0) && eps <= Scalar(1))) {
    throw std::invalid_argument("radial_split: eps must lie in (0, 1]");
  }
  if (std::abs(mu.mass() - Scalar(1)) > Scalar(1e-9)) {
    throw std::invalid_argument("radial_split: measure must have mass 1");
  }
  const Index n = mu.size();
  VectorX<Scalar> radius(n);
  for (Index i = 0; i < n; ++i) radius(i) = mu.point(i).norm();

  std::vector<Index> order;
  for (Index i = 0; i < n; ++i) {
    if (mu.weight(i) > Scalar(0)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return radius(a) > radius(b); });

  VectorX<Scalar> outer = VectorX<Scalar>::Zero(n);
  Scalar taken(0);
  Scalar r0(0);
  std::size_t pos = 0;
  while (pos < order.size()) {
    std::size_t end = pos;
    Scalar group_mass(0);
    const Scalar r = radius(order[pos]);
    while (end < order.size() && radius(order[end]) == r) {
      group_mass += mu.weight(order[end]);
      ++end;
    }
    r0 = r;
    if (taken + group_mass >= eps || end == order.size()) {
      const Scalar fraction = std::clamp((eps - taken) / group_mass, Scalar(0), Scalar(1));
      for (std::size_t j = pos; j < end; ++j) outer(order[j]) = fraction * mu.weight(order[j]);
      break;
    }
    for (std::size_t j = pos; j < end; ++j) outer(order[j]) = mu.weight(order[j]);
    taken += group_mass;
    pos = end;
  }
  VectorX<Scalar> inner = (mu.weights() - outer).cwiseMax(Scalar(0));
  return RadialSplit<Scalar>{WeightedPointMeasure<Scalar>(mu.points(), outer),
                             WeightedPointMeasure<Scalar>(mu.points(), inner), r0};
}

// ---------------------------------------------------------------------------
// Generators and diagnostics (double precision only)
// ---------------------------------------------------------------------------

enum class GeneratorFamily { cube_lebesgue, sphere_uniform, subspace_lebesgue, moment_curve };

std::string to_string(GeneratorFamily family);
GeneratorFamily generator_family_from_string(const std::string& name);

/// Seeded description of a synthetic test measure.
///
/// Family parameters (all optional):
///   cube_lebesgue:      grid (points per side), halton (1 = Halton sequence
///                       instead of a grid), offset (added to every coordinate)
///   sphere_uniform:     radius, fibonacci (1 = Fibonacci lattice, d = 3 only)
///   subspace_lebesgue:  m (flat dimension), grid, extent, offset (shift of
///                       the flat along the first transverse axis)
///   moment_curve:       t_min, t_max, density_exponent (weights ~ |t|^p)
struct GeneratorSpec {
  GeneratorFamily family = GeneratorFamily::cube_lebesgue;
  int dim = 2;
  int count = 256;
  std::uint64_t seed = 1;
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

PointMeasure generate(const GeneratorSpec& spec);

/// Largest mass found on a (k-1)-flat spanned by k atoms. All k-subsets are
/// examined when there are at most `trials` of them, otherwise `trials`
/// seeded random subsets. An atom is on the flat if its distance is at most
/// 1e-9 * max(1, scale). Atomic measures are never strictly k-admissible;
/// this quantifies how far from admissible the approximation is.
double flat_mass_diagnostic(const PointMeasure& mu, int k, std::int64_t trials, std::uint64_t seed);

/// Median over atoms of the distance to the nearest other atom.
double median_nearest_neighbor(const PointMeasure& mu);

/// Largest atom norm.
double max_radius(const PointMeasure& mu);

}  // namespace detcurve
