#pragma once

// Exact linear-algebraic primitives: simplex determinants, ellipsoids and
// their k-contents, orthogonal projections and distances to affine flats.
//
// Points are Eigen column vectors; a list of points is a d x n matrix whose
// columns are the points. Everything here is templated on the scalar type.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "detcurve/errors.hpp"

namespace detcurve {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Relative threshold below which squared pivots of the Gram factorisation
/// are treated as zero (relative to the Gram trace).
inline constexpr double kGramClampRelative = 1e-14;

/// Tolerance on F^T F - I for ellipsoid frames.
inline constexpr double kFrameTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Simplex determinants
// ---------------------------------------------------------------------------

/// Square root of the Gram determinant of the columns of `edges`, i.e. the
/// k-dimensional volume of the parallelotope they span (k = edges.cols()).
///
/// Computed from a column-pivoted Householder QR of the edge matrix rather
/// than by forming the Gram matrix: det(G) = prod R_ii^2, and the QR route
/// keeps relative accuracy at eps * cond(edges) instead of eps * cond^2.
/// Squared pivots below kGramClampRelative * trace(G) clamp the result to 0.
template <typename Derived>
typename Derived::Scalar gram_volume(const Eigen::MatrixBase<Derived>& edges) {
  using Scalar = typename Derived::Scalar;
  const Index k = edges.cols();
  if (k == 0) return Scalar(1);
  if (k > edges.rows()) return Scalar(0);
  const Scalar trace = edges.squaredNorm();
  if (!(trace > Scalar(0))) return Scalar(0);
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(edges.derived().eval());
  const auto& r = qr.matrixQR();
  Scalar volume(1);
  const Scalar floor = Scalar(kGramClampRelative) * trace;
  for (Index i = 0; i < k; ++i) {
    const Scalar pivot = std::abs(r(i, i));
    if (pivot * pivot <= floor) return Scalar(0);
    volume *= pivot;
  }
  return volume;
}

/// det(y_1, ..., y_{k+1}) for the columns of `points`: k! times the
/// k-volume of the simplex they span. Symmetric in its arguments and
/// translation invariant.
template <typename Derived>
typename Derived::Scalar simplex_det(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  if (points.cols() < 2) {
    throw DimensionError("simplex_det needs at least two points");
  }
  const Index k = points.cols() - 1;
  MatrixX<Scalar> edges = points.leftCols(k);
  edges.colwise() -= points.col(k);
  return gram_volume(edges);
}

/// det(0, y_1, ..., y_k) for the columns y_j of `vectors`.
template <typename Derived>
typename Derived::Scalar origin_det(const Eigen::MatrixBase<Derived>& vectors) {
  return gram_volume(vectors);
}

/// List-of-vectors overload; checks that all points share a dimension.
template <typename Scalar>
Scalar simplex_det(const std::vector<VectorX<Scalar>>& points) {
  if (points.size() < 2) {
    throw DimensionError("simplex_det needs at least two points");
  }
  const Index d = points.front().size();
  MatrixX<Scalar> m(d, static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw DimensionError("simplex_det: points of different dimension");
    }
    m.col(static_cast<Index>(i)) = points[i];
  }
  return simplex_det(m);
}

// ---------------------------------------------------------------------------
// Ellipsoids
// ---------------------------------------------------------------------------

/// { x : sum_i |<x - center, frame.col(i)>|^2 * inverse_lengths(i)^2 <= 1 }.
///
/// Semi-lengths are stored inverted: 0 encodes an infinite axis and +inf a
/// degenerate (zero-length) axis, so the membership sum never multiplies
/// infinities.
template <typename Scalar>
struct Ellipsoid {
  VectorX<Scalar> center;
  MatrixX<Scalar> frame;
  VectorX<Scalar> inverse_lengths;

  Index dim() const { return center.size(); }

  bool centered() const { return center.isZero(0); }

  VectorX<Scalar> semi_lengths() const {
    VectorX<Scalar> out(inverse_lengths.size());
    for (Index i = 0; i < out.size(); ++i) {
      const Scalar inv = inverse_lengths(i);
      out(i) = inv == Scalar(0) ? std::numeric_limits<Scalar>::infinity()
                                : Scalar(1) / inv;
    }
    return out;
  }

  /// Throws if the frame is not orthonormal or a length is negative.
  void validate() const {
    const Index d = center.size();
    if (d < 1 || frame.rows() != d || frame.cols() != d ||
        inverse_lengths.size() != d) {
      throw DimensionError("ellipsoid: inconsistent shapes");
    }
    const MatrixX<Scalar> gram = frame.transpose() * frame;
    const Scalar dev = (gram - MatrixX<Scalar>::Identity(d, d)).cwiseAbs().maxCoeff();
    if (!(dev <= Scalar(kFrameTolerance))) {
      throw std::invalid_argument("ellipsoid: frame is not orthonormal");
    }
    for (Index i = 0; i < d; ++i) {
      if (!(inverse_lengths(i) >= Scalar(0))) {
        throw std::invalid_argument("ellipsoid: negative or NaN semi-length");
      }
    }
  }

  static Ellipsoid from_lengths(VectorX<Scalar> center, MatrixX<Scalar> frame,
                                const VectorX<Scalar>& lengths) {
    Ellipsoid e{std::move(center), std::move(frame), VectorX<Scalar>(lengths.size())};
    for (Index i = 0; i < lengths.size(); ++i) {
      const Scalar l = lengths(i);
      if (!(l >= Scalar(0))) throw std::invalid_argument("ellipsoid: negative semi-length");
      e.inverse_lengths(i) = l == Scalar(0) ? std::numeric_limits<Scalar>::infinity()
                                            : Scalar(1) / l;
    }
    e.validate();
    return e;
  }

  static Ellipsoid ball(VectorX<Scalar> center, Scalar radius) {
    const Index d = center.size();
    return from_lengths(std::move(center), MatrixX<Scalar>::Identity(d, d),
                        VectorX<Scalar>::Constant(d, radius));
  }

  /// The ellipsoid with the same center and frame and every semi-length
  /// multiplied by `factor` (the set center + factor * (B - center)).
  Ellipsoid scaled(Scalar factor) const {
    Ellipsoid e = *this;
    e.inverse_lengths /= factor;
    return e;
  }
};

using Ellipsoidd = Ellipsoid<double>;

/// Indices of the k largest semi-lengths, ties resolved by axis order.
template <typename Scalar>
std::vector<Index> top_axes(const Ellipsoid<Scalar>& b, Index k) {
  std::vector<Index> order(static_cast<std::size_t>(b.dim()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index c) {
    return b.inverse_lengths(a) < b.inverse_lengths(c);
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

/// |B|_k: the supremum over k-subsets of axes of the product of their
/// semi-lengths, with a zero length annihilating the product even when
/// another factor is infinite.
template <typename Scalar>
Scalar k_content(const Ellipsoid<Scalar>& b, Index k) {
  if (k < 1 || k > b.dim()) {
    throw DimensionError("k_content: k must lie in [1, dim]");
  }
  bool has_zero = false;
  bool has_infinite = false;
  Scalar product(1);
  for (Index axis : top_axes(b, k)) {
    const Scalar inv = b.inverse_lengths(axis);
    if (std::isinf(inv)) {
      has_zero = true;
    } else if (inv == Scalar(0)) {
      has_infinite = true;
    } else {
      product /= inv;
    }
  }
  if (has_zero) return Scalar(0);
  if (has_infinite) return std::numeric_limits<Scalar>::infinity();
  return product;
}

/// Minkowski gauge of y - center: the smallest s >= 0 with y in the
/// ellipsoid scaled by s about its center (+inf when y leaves a degenerate axis).
template <typename Scalar, typename Derived>
Scalar gauge(const Ellipsoid<Scalar>& b, const Eigen::MatrixBase<Derived>& y) {
  if (y.size() != b.dim()) throw DimensionError("gauge: dimension mismatch");
  const VectorX<Scalar> coords = b.frame.transpose() * (y - b.center);
  Scalar sum(0);
  for (Index i = 0; i < coords.size(); ++i) {
    const Scalar inv = b.inverse_lengths(i);
    if (std::isinf(inv)) {
      if (coords(i) != Scalar(0)) return std::numeric_limits<Scalar>::infinity();
      continue;
    }
    const Scalar t = coords(i) * inv;
    sum += t * t;
  }
  return std::sqrt(sum);
}

template <typename Scalar, typename Derived>
bool ellipsoid_contains(const Ellipsoid<Scalar>& b, const Eigen::MatrixBase<Derived>& y) {
  if (y.size() != b.dim()) throw DimensionError("ellipsoid_contains: dimension mismatch");
  const VectorX<Scalar> coords = b.frame.transpose() * (y - b.center);
  Scalar sum(0);
  for (Index i = 0; i < coords.size(); ++i) {
    const Scalar inv = b.inverse_lengths(i);
    if (std::isinf(inv)) {
      if (coords(i) != Scalar(0)) return false;
      continue;
    }
    const Scalar t = coords(i) * inv;
    sum += t * t;
  }
  return sum <= Scalar(1);
}

// ---------------------------------------------------------------------------
// Matrix contents
// ---------------------------------------------------------------------------

/// |Q|_k: reciprocal of the product of the k smallest singular values of Q.
/// Rank-deficient Q gives +inf.
template <typename Derived>
typename Derived::Scalar q_content(const Eigen::MatrixBase<Derived>& q, Index k) {
  using Scalar = typename Derived::Scalar;
  if (q.rows() != q.cols()) throw DimensionError("q_content: Q must be square");
  if (k < 1 || k > q.rows()) throw DimensionError("q_content: k must lie in [1, d]");
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(q.derived().eval());
  const auto& sv = svd.singularValues();  // descending
  Scalar product(1);
  for (Index i = sv.size() - k; i < sv.size(); ++i) product *= sv(i);
  if (product == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return Scalar(1) / product;
}

/// The centered ellipsoid { x : ||Q x||^2 <= 1 }: axes are the right
/// singular vectors and inverse semi-lengths the singular values.
template <typename Derived>
Ellipsoid<typename Derived::Scalar> ellipsoid_of(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  if (q.rows() != q.cols()) throw DimensionError("ellipsoid_of: Q must be square");
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(q.derived().eval(), Eigen::ComputeFullV);
  Ellipsoid<Scalar> e{VectorX<Scalar>::Zero(q.rows()), svd.matrixV(), svd.singularValues()};
  return e;
}

// ---------------------------------------------------------------------------
// Projections and flats
// ---------------------------------------------------------------------------

/// P_x y: the component of y orthogonal to x.
template <typename DerivedX, typename DerivedY>
VectorX<typename DerivedX::Scalar> project_complement(const Eigen::MatrixBase<DerivedX>& x,
                                                      const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) throw DimensionError("project_complement: dimension mismatch");
  const Scalar norm = x.norm();
  if (!(norm > Scalar(0))) throw std::invalid_argument("project_complement: zero direction");
  const VectorX<Scalar> unit = x / norm;
  VectorX<Scalar> out = y - y.dot(unit) * unit;
  out -= out.dot(unit) * unit;
  return out;
}

/// Matrix of P_x (I - x x^T / |x|^2), for use with push-forwards.
template <typename Derived>
MatrixX<typename Derived::Scalar> complement_projector(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = x.norm();
  if (!(norm > Scalar(0))) throw std::invalid_argument("complement_projector: zero direction");
  const VectorX<Scalar> unit = x / norm;
  return MatrixX<Scalar>::Identity(x.size(), x.size()) - unit * unit.transpose();
}

/// base_point + span(basis columns), basis orthonormal.
template <typename Scalar>
struct AffineSubspace {
  VectorX<Scalar> base_point;
  MatrixX<Scalar> basis;

  Index dim() const { return base_point.size(); }
  Index flat_dim() const { return basis.cols(); }

  /// Orthonormalises `spanning` (columns) and drops dependent directions.
  static AffineSubspace through(VectorX<Scalar> base, const MatrixX<Scalar>& spanning) {
    if (spanning.cols() > 0 && spanning.rows() != base.size()) {
      throw DimensionError("AffineSubspace: spanning vectors have wrong dimension");
    }
    AffineSubspace h{std::move(base), MatrixX<Scalar>(spanning.rows(), 0)};
    if (spanning.cols() == 0) {
      h.basis.resize(h.base_point.size(), 0);
      return h;
    }
    Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(spanning);
    const Index rank = qr.rank();
    const MatrixX<Scalar> q = qr.householderQ();
    h.basis = q.leftCols(rank);
    return h;
  }
};

template <typename Scalar, typename Derived>
Scalar dist_affine(const Eigen::MatrixBase<Derived>& y, const AffineSubspace<Scalar>& h) {
  if (y.size() != h.dim()) throw DimensionError("dist_affine: dimension mismatch");
  VectorX<Scalar> r = y - h.base_point;
  if (h.flat_dim() > 0) {
    r -= h.basis * (h.basis.transpose() * r);
    r -= h.basis * (h.basis.transpose() * r);
  }
  return r.norm();
}

/// The flat through B's center spanned by its `m` longest axes.
template <typename Scalar>
AffineSubspace<Scalar> top_axis_flat(const Ellipsoid<Scalar>& b, Index m) {
  const auto axes = top_axes(b, m);
  MatrixX<Scalar> basis(b.dim(), m);
  for (Index j = 0; j < m; ++j) basis.col(j) = b.frame.col(axes[static_cast<std::size_t>(j)]);
  return AffineSubspace<Scalar>{b.center, basis};
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

inline double factorial(int n) {
  double out = 1.0;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

/// k! * sqrt(C(d, k)): the constant used for det(0, y_1..y_k) <= C |B|_k
/// on centered ellipsoids B in d dimensions.
inline double content_bound_constant(int d, int k) {
  return factorial(k) * std::sqrt(binomial(d, k));
}

}  // namespace detcurve
