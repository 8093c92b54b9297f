#pragma once

// Brute-force reference implementations used only by the tests. They avoid
// the library's own routines: determinants come from cofactor expansion or
// LU of the Gram matrix, and tuple sums from plain nested loops.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Cofactor expansion along the first row.
inline double cofactor_det(const Mat& m) {
  const auto n = m.rows();
  if (n == 1) return m(0, 0);
  double sum = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Mat minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r) {
      Eigen::Index cc = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != c) minor(r - 1, cc++) = m(r, j);
      }
    }
    sum += (c % 2 == 0 ? 1.0 : -1.0) * m(0, c) * cofactor_det(minor);
  }
  return sum;
}

/// sqrt(det(E^T E)) for the edge vectors y_j - y_last, via LU.
inline double gram_det(const std::vector<Vec>& pts) {
  const auto k = static_cast<Eigen::Index>(pts.size()) - 1;
  if (k == 0) return 1.0;
  Mat e(pts.front().size(), k);
  for (Eigen::Index j = 0; j < k; ++j) e.col(j) = pts[static_cast<std::size_t>(j)] - pts.back();
  const double g = (e.transpose() * e).determinant();
  return std::sqrt(std::max(0.0, g));
}

/// Calls f(indices) for every tuple in [0,n)^k.
inline void for_each_tuple(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  for (;;) {
    f(idx);
    int j = k - 1;
    while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == n) idx[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) return;
  }
}

/// sum over tuples of prod f_j(y_j) w_j * kernel(det), skipping det <= tau.
/// With pinned = true the last point is the origin and fs has k entries.
inline double tuple_sum(const Mat& pts, const Vec& w, const std::vector<Vec>& fs, bool pinned, double tau,
                        const std::function<double(double)>& kernel) {
  const int n = static_cast<int>(pts.cols());
  const int m = static_cast<int>(fs.size());
  double total = 0.0;
  for_each_tuple(n, m, [&](const std::vector<int>& idx) {
    double mass = 1.0;
    std::vector<Vec> ys;
    for (int j = 0; j < m; ++j) {
      const int i = idx[static_cast<std::size_t>(j)];
      mass *= fs[static_cast<std::size_t>(j)](i) * w(i);
      ys.push_back(pts.col(i));
    }
    if (mass == 0.0) return;
    if (pinned) ys.push_back(Vec::Zero(pts.rows()));
    const double det = gram_det(ys);
    if (det > tau) total += mass * kernel(det);
  });
  return total;
}

/// Mass of atoms with x^T F diag(l^-2) F^T x <= 1 around `center`.
inline double ellipsoid_mass(const Mat& pts, const Vec& w, const Mat& frame, const Vec& lengths, const Vec& center) {
  const Mat form = frame * lengths.array().square().inverse().matrix().asDiagonal() * frame.transpose();
  double mass = 0.0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Vec x = pts.col(i) - center;
    if (x.dot(form * x) <= 1.0 + 1e-12) mass += w(i);
  }
  return mass;
}

/// Product of the k largest entries.
inline double top_k_product(Vec l, int k) {
  std::sort(l.data(), l.data() + l.size(), std::greater<>());
  double p = 1.0;
  for (int j = 0; j < k; ++j) p *= l(j);
  return p;
}

}  // namespace oracle
