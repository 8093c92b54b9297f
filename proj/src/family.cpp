#include <climits>
#include <cmath>
#include <random>

#include "detcurve/curvature.hpp"

namespace detcurve {

std::string to_string(FamilyMode mode) {
  switch (mode) {
    case FamilyMode::scale_floored_search: return "scale_floored_search";
    case FamilyMode::doubling_dyadic: return "doubling_dyadic";
  }
  return "unknown";
}

FamilyMode family_mode_from_string(const std::string& name) {
  if (name == "scale_floored_search" || name == "search") return FamilyMode::scale_floored_search;
  if (name == "doubling_dyadic" || name == "doubling") return FamilyMode::doubling_dyadic;
  throw ConfigError("unknown family mode '" + name + "'");
}

std::int64_t EllipsoidFamily::shapes_per_frame() const {
  if (frames.empty()) return 0;
  std::int64_t n = 1;
  for (Index a = 0; a < dim(); ++a) n *= static_cast<std::int64_t>(lengths.size());
  return n;
}

std::vector<int> EllipsoidFamily::shape_indices(std::int64_t s) const {
  const auto base = static_cast<std::int64_t>(lengths.size());
  std::vector<int> idx(static_cast<std::size_t>(dim()));
  for (auto& i : idx) {
    i = static_cast<int>(s % base);
    s /= base;
  }
  return idx;
}

Ellipsoidd EllipsoidFamily::member(std::int64_t index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("family member index out of range");
  const std::int64_t per = shapes_per_frame();
  const auto& frame = frames[static_cast<std::size_t>(index / per)];
  const auto idx = shape_indices(index % per);
  VectorX<double> l(dim());
  for (Index a = 0; a < dim(); ++a) l(a) = lengths[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
  return Ellipsoidd::from_lengths(VectorX<double>::Zero(dim()), frame, l);
}

bool EllipsoidFamily::in_core(std::int64_t index) const {
  const auto idx = shape_indices(index % shapes_per_frame());
  for (int i : idx) {
    const auto u = static_cast<std::size_t>(i);
    if (u + 1 >= lengths.size() || lengths[u + 1] != 2.0 * lengths[u]) return false;
  }
  return true;
}

MatrixX<double> random_rotation(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixX<double> g(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<MatrixX<double>> qr(g);
  MatrixX<double> q = qr.householderQ();
  const MatrixX<double> r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

namespace {

MatrixX<double> pca_frame(const PointMeasure& mu, std::mt19937_64& rng) {
  const Index d = mu.dim();
  const Index n = mu.size();
  const Index take = std::min(n, std::max<Index>(2 * d, n / 8));
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index(0));
  MatrixX<double> m = MatrixX<double>::Zero(d, d);
  for (Index j = 0; j < take; ++j) {
    std::uniform_int_distribution<Index> pick(j, n - 1);
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(rng))]);
    const Index i = pool[static_cast<std::size_t>(j)];
    m.noalias() += mu.weight(i) * mu.point(i) * mu.point(i).transpose();
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<double>> eig(m);
  // Largest principal direction first.
  return eig.eigenvectors().rowwise().reverse();
}

}  // namespace

EllipsoidFamily make_family(const PointMeasure& mu, const FamilyOptions& options) {
  const Index d = mu.dim();
  EllipsoidFamily family;
  family.mode = options.mode;
  family.floor = options.floor >= 0.0 ? options.floor : median_nearest_neighbor(mu);
  const double h = family.floor;

  const double reach = std::max(max_radius(mu), 1e-300);
  const int j_max = options.j_max.value_or(static_cast<int>(std::ceil(std::log2(reach))) + 1);
  int j_min;
  if (options.j_min) {
    j_min = *options.j_min;
  } else if (h > 0.0) {
    j_min = static_cast<int>(std::ceil(std::log2(h)));
  } else {
    j_min = j_max - 12;
  }
  if (j_min > j_max) throw ConfigError("family: empty dyadic range");

  if (family.mode == FamilyMode::scale_floored_search && h > 0.0) {
    const int jh = static_cast<int>(std::lround(std::log2(h)));
    const bool dyadic_floor = std::exp2(jh) == h;
    family.lengths.push_back(h);
    family.exponents.push_back(dyadic_floor ? jh : INT_MIN);
    for (int j = j_min; j <= j_max; ++j) {
      if (std::exp2(j) > h) {
        family.lengths.push_back(std::exp2(j));
        family.exponents.push_back(j);
      }
    }
  } else {
    for (int j = j_min; j <= j_max; ++j) {
      if (std::exp2(j) < h) continue;
      family.lengths.push_back(std::exp2(j));
      family.exponents.push_back(j);
    }
  }
  if (family.lengths.empty()) throw ConfigError("family: no semi-length at or above the floor");

  std::mt19937_64 rng(options.seed);
  family.frames.push_back(MatrixX<double>::Identity(d, d));
  if (d > 1) {
    for (int i = 0; i < options.pca_frames; ++i) family.frames.push_back(pca_frame(mu, rng));
    for (int i = 0; i < options.random_frames; ++i) family.frames.push_back(random_rotation(d, rng));
  }
  return family;
}

}  // namespace detcurve
