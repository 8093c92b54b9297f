#include "detcurve/measure.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "detcurve/parallel.hpp"

namespace detcurve {
namespace {

int grid_side(const GeneratorSpec& spec, int flat_dim) {
  if (spec.params.count("grid") != 0) {
    const int n = static_cast<int>(spec.param("grid", 0));
    if (n < 1) throw ConfigError("generator: grid must be positive");
    return n;
  }
  const int n = static_cast<int>(std::lround(std::pow(spec.count, 1.0 / flat_dim)));
  if (n < 1 || std::lround(std::pow(n, flat_dim)) != spec.count) {
    throw ConfigError("generator: count " + std::to_string(spec.count) +
                      " is not a perfect power of the grid dimension; pass params.grid");
  }
  return n;
}

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double scale = 1.0 / base;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= base;
  }
  return result;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// Cell-centred points of the n^m grid on [0, extent]^m, written into the
// first m coordinates of a dim-dimensional matrix.
MatrixX<double> grid_points(int dim, int m, int n, double extent) {
  std::int64_t total = 1;
  for (int j = 0; j < m; ++j) total *= n;
  MatrixX<double> p = MatrixX<double>::Zero(dim, static_cast<Index>(total));
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rest = idx;
    for (int j = 0; j < m; ++j) {
      p(j, static_cast<Index>(idx)) = (static_cast<double>(rest % n) + 0.5) / n * extent;
      rest /= n;
    }
  }
  return p;
}

PointMeasure make_cube(const GeneratorSpec& spec) {
  const int d = spec.dim;
  const double offset = spec.param("offset", 0.0);
  MatrixX<double> p;
  if (spec.param("halton", 0.0) != 0.0) {
    if (d > static_cast<int>(std::size(kPrimes))) throw ConfigError("halton: dimension too large");
    p.resize(d, spec.count);
    for (int i = 0; i < spec.count; ++i) {
      for (int j = 0; j < d; ++j) {
        p(j, i) = radical_inverse(static_cast<std::uint64_t>(i) + 1 + spec.seed, kPrimes[j]);
      }
    }
  } else {
    p = grid_points(d, d, grid_side(spec, d), 1.0);
  }
  p.array() += offset;
  return PointMeasure::uniform(std::move(p));
}

PointMeasure make_sphere(const GeneratorSpec& spec) {
  const int d = spec.dim;
  if (d < 2) throw ConfigError("sphere_uniform: dimension must be at least 2");
  const double radius = spec.param("radius", 1.0);
  MatrixX<double> p(d, spec.count);
  if (spec.param("fibonacci", 0.0) != 0.0) {
    if (d != 3) throw ConfigError("sphere_uniform: fibonacci lattice needs dim 3");
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < spec.count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / spec.count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      p.col(i) << r * std::cos(golden * i), r * std::sin(golden * i), z;
    }
  } else {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal;
    for (int i = 0; i < spec.count; ++i) {
      double norm = 0.0;
      do {
        for (int j = 0; j < d; ++j) p(j, i) = normal(rng);
        norm = p.col(i).norm();
      } while (norm < 1e-8);
      p.col(i) /= norm;
    }
  }
  p *= radius;
  return PointMeasure::uniform(std::move(p));
}

PointMeasure make_subspace(const GeneratorSpec& spec) {
  const int d = spec.dim;
  const int m = static_cast<int>(spec.param("m", 1.0));
  if (m < 1 || m > d) throw ConfigError("subspace_lebesgue: need 1 <= m <= dim");
  MatrixX<double> p = grid_points(d, m, grid_side(spec, m), spec.param("extent", 1.0));
  if (m < d) p.row(m).array() += spec.param("offset", 0.0);
  return PointMeasure::uniform(std::move(p));
}

PointMeasure make_moment_curve(const GeneratorSpec& spec) {
  const int d = spec.dim;
  const double t0 = spec.param("t_min", 0.0);
  const double t1 = spec.param("t_max", 1.0);
  const double power = spec.param("density_exponent", 0.0);
  MatrixX<double> p(d, spec.count);
  VectorX<double> w(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    const double t = t0 + (i + 0.5) / spec.count * (t1 - t0);
    double tp = 1.0;
    for (int j = 0; j < d; ++j) {
      tp *= t;
      p(j, i) = tp;
    }
    w(i) = power == 0.0 ? 1.0 : std::pow(std::abs(t), power);
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw ConfigError("moment_curve: density integrates to zero");
  return PointMeasure(std::move(p), w / total);
}

}  // namespace

std::string to_string(GeneratorFamily family) {
  switch (family) {
    case GeneratorFamily::cube_lebesgue: return "cube_lebesgue";
    case GeneratorFamily::sphere_uniform: return "sphere_uniform";
    case GeneratorFamily::subspace_lebesgue: return "subspace_lebesgue";
    case GeneratorFamily::moment_curve: return "moment_curve";
  }
  return "unknown";
}

GeneratorFamily generator_family_from_string(const std::string& name) {
  if (name == "cube_lebesgue") return GeneratorFamily::cube_lebesgue;
  if (name == "sphere_uniform") return GeneratorFamily::sphere_uniform;
  if (name == "subspace_lebesgue") return GeneratorFamily::subspace_lebesgue;
  if (name == "moment_curve") return GeneratorFamily::moment_curve;
  throw ConfigError("unknown generator family '" + name + "'");
}

PointMeasure generate(const GeneratorSpec& spec) {
  if (spec.dim < 1) throw ConfigError("generator: dim must be positive");
  if (spec.count < 1 && spec.params.count("grid") == 0) {
    throw ConfigError("generator: count must be positive");
  }
  switch (spec.family) {
    case GeneratorFamily::cube_lebesgue: return make_cube(spec);
    case GeneratorFamily::sphere_uniform: return make_sphere(spec);
    case GeneratorFamily::subspace_lebesgue: return make_subspace(spec);
    case GeneratorFamily::moment_curve: return make_moment_curve(spec);
  }
  throw ConfigError("generator: unhandled family");
}

double max_radius(const PointMeasure& mu) { return mu.points().colwise().norm().maxCoeff(); }

double median_nearest_neighbor(const PointMeasure& mu) {
  const Index n = mu.size();
  if (n < 2) return 0.0;
  std::vector<double> nearest(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    const auto p = mu.point(static_cast<Index>(i));
    for (Index j = 0; j < n; ++j) {
      if (j == static_cast<Index>(i)) continue;
      best = std::min(best, (mu.point(j) - p).squaredNorm());
    }
    nearest[i] = std::sqrt(best);
  });
  const auto mid = nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2);
  std::nth_element(nearest.begin(), mid, nearest.end());
  return *mid;
}

double flat_mass_diagnostic(const PointMeasure& mu, int k, std::int64_t trials, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("flat_mass_diagnostic: k must be positive");
  std::vector<Index> support;
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) > 0.0) support.push_back(i);
  }
  const auto n = static_cast<int>(support.size());
  if (n < k) throw std::invalid_argument("flat_mass_diagnostic: fewer atoms than k");
  const double tol = 1e-9 * std::max(1.0, max_radius(mu));

  auto flat_mass = [&](const std::vector<int>& chosen) {
    const VectorX<double> base = mu.point(support[static_cast<std::size_t>(chosen[0])]);
    MatrixX<double> spanning(mu.dim(), k - 1);
    for (int j = 1; j < k; ++j) {
      spanning.col(j - 1) = mu.point(support[static_cast<std::size_t>(chosen[static_cast<std::size_t>(j)])]) - base;
    }
    const auto flat = AffineSubspace<double>::through(base, spanning);
    double mass = 0.0;
    for (Index i : support) {
      if (dist_affine(mu.point(i), flat) <= tol) mass += mu.weight(i);
    }
    return mass;
  };

  std::vector<std::vector<int>> subsets;
  if (binomial(n, k) <= static_cast<double>(trials)) {
    std::vector<int> c(static_cast<std::size_t>(k));
    std::iota(c.begin(), c.end(), 0);
    for (;;) {
      subsets.push_back(c);
      int i = k - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
      if (i < 0) break;
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
  } else {
    std::mt19937_64 rng(seed);
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (std::int64_t t = 0; t < trials; ++t) {
      for (int j = 0; j < k; ++j) {
        std::uniform_int_distribution<int> pick(j, n - 1);
        std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(rng))]);
      }
      subsets.emplace_back(pool.begin(), pool.begin() + k);
    }
  }

  std::vector<double> best(subsets.size());
  parallel_for(subsets.size(), [&](std::size_t s) { best[s] = flat_mass(subsets[s]); });
  return best.empty() ? 0.0 : *std::max_element(best.begin(), best.end());
}

}  // namespace detcurve
