#include "detcurve/curvature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "detcurve/parallel.hpp"

namespace detcurve {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInflate = 1.0 + 1e-12;

void check_k(const PointMeasure& mu, int k) {
  if (k < 1 || k > mu.dim()) throw DimensionError("k must lie in [1, dim]");
}

// Frame coordinates of p_i - center, computed exactly as ellipsoid_contains
// does so that membership decisions agree bit for bit.
MatrixX<double> frame_coords(const MatrixX<double>& frame, const PointMeasure& mu,
                             const VectorX<double>& center) {
  MatrixX<double> c(mu.dim(), mu.size());
  for (Index i = 0; i < mu.size(); ++i) {
    const VectorX<double> coords = frame.transpose() * (mu.point(i) - center);
    c.col(i) = coords;
  }
  return c;
}

double squared_gauge(const MatrixX<double>& coords, Index i, const VectorX<double>& inv) {
  double sum = 0.0;
  for (Index a = 0; a < coords.rows(); ++a) {
    const double t = coords(a, i) * inv(a);
    sum += t * t;
  }
  return sum;
}

double top_product(VectorX<double> lengths, int k) {
  std::sort(lengths.data(), lengths.data() + lengths.size(), std::greater<>());
  double p = 1.0;
  for (int j = 0; j < k; ++j) p *= lengths(j);
  return p;
}

double ratio_of(double mass, double content, double alpha) {
  if (content == 0.0) return mass > 0.0 ? kInf : 0.0;
  if (std::isinf(content)) return 0.0;
  return mass / std::pow(content, alpha);
}

VectorX<double> shape_lengths(const EllipsoidFamily& family, std::int64_t shape) {
  const auto idx = family.shape_indices(shape);
  VectorX<double> l(family.dim());
  for (Index a = 0; a < l.size(); ++a) l(a) = family.lengths[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
  return l;
}

// Atoms of positive weight sorted by their gauge for a fixed shape.
struct GaugeProfile {
  std::vector<double> gauge;  // ascending
  std::vector<double> cumulative;  // mass of atoms with gauge <= gauge[i], ties merged
};

GaugeProfile gauge_profile(const PointMeasure& mu, const MatrixX<double>& frame, const VectorX<double>& lengths) {
  const MatrixX<double> coords = frame.transpose() * mu.points();
  const VectorX<double> inv = lengths.cwiseInverse();
  std::vector<std::pair<double, double>> gw;
  gw.reserve(static_cast<std::size_t>(mu.size()));
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) > 0.0) gw.emplace_back(std::sqrt(squared_gauge(coords, i, inv)), mu.weight(i));
  }
  std::sort(gw.begin(), gw.end());
  GaugeProfile out;
  double cum = 0.0;
  for (std::size_t i = 0; i < gw.size(); ++i) {
    cum += gw[i].second;
    if (i + 1 < gw.size() && gw[i + 1].first == gw[i].first) continue;
    out.gauge.push_back(gw[i].first);
    out.cumulative.push_back(cum);
  }
  return out;
}

struct ShapeState {
  MatrixX<double> frame;
  VectorX<double> log_lengths;  // log2 semi-lengths

  VectorX<double> lengths() const { return log_lengths.unaryExpr([](double x) { return std::exp2(x); }); }
};

struct ScaledValue {
  double value = 0.0;
  double scale = 1.0;
};

// Best ratio over dilates s * B with every semi-length at least the floor.
ScaledValue best_scale_ratio(const PointMeasure& mu, const ShapeState& shape, int k, double alpha, double floor) {
  const VectorX<double> l = shape.lengths();
  const GaugeProfile prof = gauge_profile(mu, shape.frame, l);
  const double content = top_product(l, k);
  const double s_min = floor / l.minCoeff();
  ScaledValue best{0.0, std::max(s_min, 1.0)};
  auto consider = [&](double s, double mass) {
    if (!(s > 0.0)) return;
    const double r = mass / std::pow(std::pow(s, k) * content, alpha);
    if (r > best.value) best = {r, s};
  };
  if (s_min > 0.0) {
    double mass = 0.0;
    for (std::size_t i = 0; i < prof.gauge.size() && prof.gauge[i] <= s_min; ++i) mass = prof.cumulative[i];
    consider(s_min, mass);
  }
  for (std::size_t i = 0; i < prof.gauge.size(); ++i) {
    if (prof.gauge[i] >= s_min) consider(prof.gauge[i], prof.cumulative[i]);
  }
  return best;
}

// Smallest content of a dilate s * B with mass at least eps.
ScaledValue min_scale_content(const PointMeasure& mu, const ShapeState& shape, int k, double eps) {
  const VectorX<double> l = shape.lengths();
  const GaugeProfile prof = gauge_profile(mu, shape.frame, l);
  const double target = eps * (1.0 - 1e-12);
  for (std::size_t i = 0; i < prof.gauge.size(); ++i) {
    if (prof.cumulative[i] >= target) {
      const double s = prof.gauge[i];
      return {std::pow(s, k) * top_product(l, k), s};
    }
  }
  return {kInf, kInf};
}

MatrixX<double> givens(const MatrixX<double>& frame, Index a, Index b, double theta) {
  MatrixX<double> f = frame;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  f.col(a) = c * frame.col(a) + s * frame.col(b);
  f.col(b) = -s * frame.col(a) + c * frame.col(b);
  return f;
}

// Derivative-free local search; `score` is maximised. Moves are tried in a
// fixed order and the first improvement is taken.
template <class Score>
std::pair<ShapeState, double> local_search(ShapeState state, double value, int budget, std::int64_t& evaluations,
                                           Score&& score) {
  const Index d = state.log_lengths.size();
  double theta = std::numbers::pi / 16.0;
  int used = 0;
  while (used < budget) {
    bool improved = false;
    for (Index a = 0; a < d && used < budget && !improved; ++a) {
      for (double step : {0.25, -0.25}) {
        ShapeState trial = state;
        trial.log_lengths(a) += step;
        const double v = score(trial);
        ++used;
        if (v > value) {
          state = std::move(trial);
          value = v;
          improved = true;
          break;
        }
        if (used >= budget) break;
      }
    }
    for (Index a = 0; a < d && used < budget && !improved; ++a) {
      for (Index b = a + 1; b < d && used < budget && !improved; ++b) {
        for (double sign : {1.0, -1.0}) {
          ShapeState trial = state;
          trial.frame = givens(state.frame, a, b, sign * theta);
          const double v = score(trial);
          ++used;
          if (v > value) {
            state = std::move(trial);
            value = v;
            improved = true;
            break;
          }
          if (used >= budget) break;
        }
      }
    }
    if (!improved) {
      theta *= 0.5;
      if (theta < std::numbers::pi / 1024.0) break;
    }
  }
  evaluations += used;
  return {std::move(state), value};
}

ShapeState shape_of_member(const EllipsoidFamily& family, std::int64_t index) {
  const std::int64_t per = family.shapes_per_frame();
  ShapeState s;
  s.frame = family.frames[static_cast<std::size_t>(index / per)];
  s.log_lengths = shape_lengths(family, index % per).unaryExpr([](double x) { return std::log2(x); });
  return s;
}

Ellipsoidd ellipsoid_from(const ShapeState& shape, double scale) {
  const Index d = shape.log_lengths.size();
  return Ellipsoidd::from_lengths(VectorX<double>::Zero(d), shape.frame, scale * shape.lengths());
}

std::vector<std::int64_t> best_indices(const std::vector<double>& values, int count, bool largest) {
  std::vector<std::int64_t> order(values.size());
  std::iota(order.begin(), order.end(), std::int64_t{0});
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(count, 0)), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::int64_t a, std::int64_t b) {
                      const double va = values[static_cast<std::size_t>(a)];
                      const double vb = values[static_cast<std::size_t>(b)];
                      if (va != vb) return largest ? va > vb : va < vb;
                      return a < b;
                    });
  order.resize(n);
  return order;
}

// Evaluates `per_shape(coords, lengths, inv)` for every member; chunks are
// frames.
template <class PerShape>
std::vector<double> evaluate_members(const PointMeasure& mu, const EllipsoidFamily& family, PerShape&& per_shape) {
  const std::int64_t per = family.shapes_per_frame();
  std::vector<double> values(static_cast<std::size_t>(family.size()));
  const VectorX<double> origin = VectorX<double>::Zero(mu.dim());
  parallel_for(family.frames.size(), [&](std::size_t f) {
    const MatrixX<double> coords = frame_coords(family.frames[f], mu, origin);
    for (std::int64_t s = 0; s < per; ++s) {
      const VectorX<double> l = shape_lengths(family, s);
      values[f * static_cast<std::size_t>(per) + static_cast<std::size_t>(s)] =
          per_shape(coords, l, VectorX<double>(l.cwiseInverse()));
    }
  });
  return values;
}

}  // namespace

// ---------------------------------------------------------------------------

double curvature_ratio(const PointMeasure& mu, const Ellipsoidd& b, int k, double alpha) {
  return ratio_of(eval_measure(mu, b), k_content(b, k), alpha);
}

CurvatureEstimate estimate_curvature_constant(const PointMeasure& mu, int k, double alpha,
                                              const EllipsoidFamily& family, const RefineOptions& refine) {
  check_k(mu, k);
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (family.size() == 0) throw std::invalid_argument("estimate_curvature_constant: empty family");
  if (family.dim() != mu.dim()) throw DimensionError("family dimension does not match measure");

  const auto ratios = evaluate_members(mu, family, [&](const MatrixX<double>& coords, const VectorX<double>& l,
                                                       const VectorX<double>& inv) {
    double mass = 0.0;
    for (Index i = 0; i < coords.cols(); ++i) {
      if (squared_gauge(coords, i, inv) <= 1.0) mass += mu.weight(i);
    }
    return ratio_of(mass, top_product(l, k), alpha);
  });

  CurvatureEstimate est;
  est.k = k;
  est.alpha = alpha;
  est.family_size = family.size();
  est.evaluations = family.size();
  const std::int64_t top = best_indices(ratios, 1, true).front();
  est.witness_index = top;
  est.witness = family.member(top);
  est.family_constant = ratios[static_cast<std::size_t>(top)];
  est.constant = curvature_ratio(mu, est.witness, k, alpha);

  if (refine.budget <= 0 || refine.starts <= 0 || std::isinf(est.constant)) return est;

  const auto starts = best_indices(ratios, refine.starts, true);
  struct Outcome {
    ShapeState shape;
    double scale = 1.0;
    std::int64_t evaluations = 0;
  };
  std::vector<Outcome> outcomes(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    auto& out = outcomes[s];
    auto score = [&](const ShapeState& shape) { return best_scale_ratio(mu, shape, k, alpha, family.floor).value; };
    ShapeState start = shape_of_member(family, starts[s]);
    const double v0 = score(start);
    auto [shape, value] = local_search(std::move(start), v0, refine.budget, out.evaluations, score);
    (void)value;
    out.scale = best_scale_ratio(mu, shape, k, alpha, family.floor).scale;
    out.shape = std::move(shape);
  });
  for (const auto& out : outcomes) {
    est.evaluations += out.evaluations + 1;
    const Ellipsoidd candidate = ellipsoid_from(out.shape, out.scale * kInflate);
    const double r = curvature_ratio(mu, candidate, k, alpha);
    if (r > est.constant) {
      est.constant = r;
      est.witness = candidate;
      est.witness_index = -1;
    }
  }
  return est;
}

ContentWitness min_content_at_mass(const PointMeasure& mu, int k, double eps, const EllipsoidFamily& family,
                                   const RefineOptions& refine) {
  check_k(mu, k);
  if (!(eps > 0.0)) throw std::invalid_argument("min_content_at_mass: eps must be positive");
  if (eps > mu.mass() * (1.0 + 1e-12)) {
    throw std::invalid_argument("min_content_at_mass: eps exceeds the total mass");
  }
  if (family.size() == 0) throw std::invalid_argument("min_content_at_mass: empty family");
  if (family.dim() != mu.dim()) throw DimensionError("family dimension does not match measure");

  // Shapes only: each member is rescaled, so the value depends on lengths up to a factor.
  const std::int64_t per = family.shapes_per_frame();
  std::vector<double> contents(static_cast<std::size_t>(family.size()));
  parallel_for(family.frames.size(), [&](std::size_t f) {
    for (std::int64_t s = 0; s < per; ++s) {
      const auto idx = static_cast<std::int64_t>(f) * per + s;
      contents[static_cast<std::size_t>(idx)] = min_scale_content(mu, shape_of_member(family, idx), k, eps).value;
    }
  });

  auto finish = [&](const ShapeState& shape) {
    const ScaledValue sv = min_scale_content(mu, shape, k, eps);
    ContentWitness w;
    w.witness = ellipsoid_from(shape, sv.scale * kInflate);
    w.delta_hat = k_content(w.witness, k);
    return w;
  };

  const std::int64_t top = best_indices(contents, 1, false).front();
  ContentWitness best = finish(shape_of_member(family, top));
  if (refine.budget <= 0 || refine.starts <= 0 || best.delta_hat == 0.0) return best;

  const auto starts = best_indices(contents, refine.starts, false);
  std::vector<ShapeState> shapes(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    auto score = [&](const ShapeState& shape) { return -min_scale_content(mu, shape, k, eps).value; };
    ShapeState start = shape_of_member(family, starts[s]);
    std::int64_t evaluations = 0;
    const double v0 = score(start);
    shapes[s] = local_search(std::move(start), v0, refine.budget, evaluations, score).first;
  });
  for (const auto& shape : shapes) {
    ContentWitness w = finish(shape);
    if (w.delta_hat < best.delta_hat) best = std::move(w);
  }
  return best;
}

// ---------------------------------------------------------------------------

double gaussian_integral(const PointMeasure& mu, const MatrixX<double>& q, const VectorX<double>& x0) {
  if (q.cols() != mu.dim() || q.rows() != x0.size()) throw DimensionError("gaussian_integral: shape mismatch");
  CompensatedSum sum;
  for (Index i = 0; i < mu.size(); ++i) {
    sum.add(mu.weight(i) * std::exp(-(q * mu.point(i) - x0).squaredNorm()));
  }
  return sum.value();
}

MatrixX<double> random_form(Index d, double lo, double hi, std::mt19937_64& rng) {
  if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("random_form: need 0 < lo <= hi");
  std::uniform_real_distribution<double> u(std::log2(lo), std::log2(hi));
  const MatrixX<double> left = random_rotation(d, rng);
  const MatrixX<double> right = random_rotation(d, rng);
  VectorX<double> s(d);
  for (Index i = 0; i < d; ++i) s(i) = std::exp2(u(rng));
  return left * s.asDiagonal() * right.transpose();
}

LayerCakeResult layer_cake_check(const PointMeasure& mu, const MatrixX<double>& q) {
  if (q.cols() != mu.dim()) throw DimensionError("layer_cake_check: shape mismatch");
  LayerCakeResult r;
  r.lhs = gaussian_integral(mu, q, VectorX<double>::Zero(q.rows()));
  std::vector<std::pair<double, double>> gw;
  for (Index i = 0; i < mu.size(); ++i) gw.emplace_back((q * mu.point(i)).norm(), mu.weight(i));
  std::sort(gw.begin(), gw.end());
  // mu(||Qx|| <= t) is constant on [t_j, t_{j+1}); each piece integrates to
  // C_j (e^(-t_j^2) - e^(-t_{j+1}^2)).
  CompensatedSum sum;
  double cum = 0.0;
  for (std::size_t j = 0; j < gw.size(); ++j) {
    cum += gw[j].second;
    const double t0 = gw[j].first;
    const double t1 = j + 1 < gw.size() ? gw[j + 1].first : kInf;
    if (t1 == t0) continue;
    sum.add(cum * (std::exp(-t0 * t0) - std::exp(-t1 * t1)));
  }
  r.rhs = sum.value();
  r.rel_err = r.lhs > 0.0 ? std::abs(r.lhs - r.rhs) / r.lhs : std::abs(r.rhs);
  return r;
}

double gaussian_content_constant(int k, double alpha) {
  CompensatedSum sum;
  for (int j = 8; j >= -400; --j) {
    const double a = std::pow(4.0, j - 1);
    const double b = std::pow(4.0, j);
    // e^-a - e^-b without cancellation.
    const double piece = -std::exp(-a) * std::expm1(-(b - a));
    sum.add(piece * std::exp2(j * k * alpha));
  }
  return sum.value();
}

GaussianContentResult gaussian_content_check(const PointMeasure& mu, const MatrixX<double>& q, int k, double alpha) {
  check_k(mu, k);
  GaussianContentResult r;
  r.integral = gaussian_integral(mu, q, VectorX<double>::Zero(q.rows()));
  r.content = q_content(q, k);

  std::vector<std::pair<double, double>> gw;
  double inside = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    if (!(mu.weight(i) > 0.0)) continue;
    const VectorX<double> image = q * mu.point(i);
    if (image.squaredNorm() <= 1.0) inside += mu.weight(i);
    gw.emplace_back(image.norm(), mu.weight(i));
  }
  r.lower = std::exp(-1.0) * inside;
  std::sort(gw.begin(), gw.end());

  if (std::isinf(r.content)) {
    r.dyadic_constant = 0.0;
    r.bound = kInf;
  } else if (!gw.empty() && gw.front().first == 0.0) {
    r.dyadic_constant = kInf;
    r.bound = kInf;
  } else if (!gw.empty()) {
    const int j_lo = static_cast<int>(std::ceil(std::log2(gw.front().first)));
    const int j_hi = static_cast<int>(std::ceil(std::log2(gw.back().first)));
    std::size_t pos = 0;
    double cum = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
      const double radius = std::exp2(j);
      while (pos < gw.size() && gw[pos].first <= radius) cum += gw[pos++].second;
      r.dyadic_constant = std::max(r.dyadic_constant, ratio_of(cum, std::exp2(j * k) * r.content, alpha));
    }
    r.bound = gaussian_content_constant(k, alpha) * r.dyadic_constant * std::pow(r.content, alpha);
  }
  r.ok = r.lower <= r.integral && r.integral <= r.bound;
  return r;
}

// ---------------------------------------------------------------------------

double slab_constant(const PointMeasure& mu, int k, double alpha, const std::vector<AffineSubspace<double>>& subspaces) {
  check_k(mu, k);
  const double zero_tol = 1e-12 * std::max(1.0, max_radius(mu));
  std::vector<double> best(subspaces.size(), 0.0);
  parallel_for(subspaces.size(), [&](std::size_t s) {
    const auto& h = subspaces[s];
    if (h.flat_dim() != k - 1) throw DimensionError("slab_constant: subspaces must have dimension k-1");
    std::vector<std::pair<double, double>> dw;
    for (Index i = 0; i < mu.size(); ++i) {
      if (mu.weight(i) > 0.0) dw.emplace_back(dist_affine(mu.point(i), h), mu.weight(i));
    }
    std::sort(dw.begin(), dw.end());
    double cum = 0.0;
    for (std::size_t i = 0; i < dw.size(); ++i) {
      cum += dw[i].second;
      if (i + 1 < dw.size() && dw[i + 1].first == dw[i].first) continue;
      if (dw[i].first <= zero_tol) {
        best[s] = kInf;
        return;
      }
      best[s] = std::max(best[s], cum / std::pow(dw[i].first, alpha * k));
    }
  });
  double out = 0.0;
  for (double b : best) out = std::max(out, b);
  return out;
}

SlabImplicationResult slab_implication_check(const PointMeasure& mu, int k, double alpha,
                                             const EllipsoidFamily& family) {
  check_k(mu, k);
  SlabImplicationResult r;
  r.members = family.size();
  // One subspace per (frame, set of top k-1 axes).
  std::vector<AffineSubspace<double>> subspaces;
  std::map<std::pair<std::size_t, std::vector<Index>>, std::size_t> seen;
  for (std::int64_t m = 0; m < family.size(); ++m) {
    const Ellipsoidd b = family.member(m);
    auto axes = top_axes(b, k - 1);
    std::sort(axes.begin(), axes.end());
    const auto key = std::make_pair(static_cast<std::size_t>(m / family.shapes_per_frame()), axes);
    if (seen.emplace(key, subspaces.size()).second) subspaces.push_back(top_axis_flat(b, k - 1));
  }
  r.slab_constant = slab_constant(mu, k, alpha, subspaces);

  std::vector<std::int64_t> violations(static_cast<std::size_t>(family.size()), 0);
  std::vector<double> worst(static_cast<std::size_t>(family.size()), 0.0);
  parallel_for(static_cast<std::size_t>(family.size()), [&](std::size_t m) {
    const Ellipsoidd b = family.member(static_cast<std::int64_t>(m));
    const double mass = eval_measure(mu, b);
    const auto axes = top_axes(b, k);
    const double lk = 1.0 / b.inverse_lengths(axes.back());
    const double by_length = r.slab_constant * std::pow(lk, alpha * k);
    const double by_content = r.slab_constant * std::pow(k_content(b, k), alpha);
    const double tol = 1.0 + 1e-12;
    if (mass > by_length * tol || by_length > by_content * tol) violations[m] = 1;
    if (by_length > 0.0 && std::isfinite(by_length)) worst[m] = mass / by_length;
  });
  for (std::size_t m = 0; m < violations.size(); ++m) {
    r.violations += violations[m];
    r.worst_ratio = std::max(r.worst_ratio, worst[m]);
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> maximal_function(const PointMeasure& mu, int k, double alpha, const EllipsoidFamily& family,
                                     const MatrixX<double>& eval_points, bool core_only) {
  check_k(mu, k);
  if (eval_points.rows() != mu.dim()) throw DimensionError("maximal_function: evaluation points have wrong dimension");
  const std::int64_t per = family.shapes_per_frame();
  std::vector<char> use(static_cast<std::size_t>(per), 1);
  std::vector<VectorX<double>> inv(static_cast<std::size_t>(per));
  std::vector<double> content(static_cast<std::size_t>(per));
  for (std::int64_t s = 0; s < per; ++s) {
    const VectorX<double> l = shape_lengths(family, s);
    inv[static_cast<std::size_t>(s)] = l.cwiseInverse();
    content[static_cast<std::size_t>(s)] = top_product(l, k);
    if (core_only && !family.in_core(s)) use[static_cast<std::size_t>(s)] = 0;
  }
  std::vector<double> values(static_cast<std::size_t>(eval_points.cols()), 0.0);
  parallel_for(values.size(), [&](std::size_t e) {
    const VectorX<double> y = eval_points.col(static_cast<Index>(e));
    double best = 0.0;
    for (const auto& frame : family.frames) {
      const MatrixX<double> coords = frame_coords(frame, mu, y);
      for (std::int64_t s = 0; s < per; ++s) {
        if (!use[static_cast<std::size_t>(s)]) continue;
        double mass = 0.0;
        for (Index i = 0; i < coords.cols(); ++i) {
          if (squared_gauge(coords, i, inv[static_cast<std::size_t>(s)]) <= 1.0) mass += mu.weight(i);
        }
        best = std::max(best, ratio_of(mass, content[static_cast<std::size_t>(s)], alpha));
      }
    }
    values[e] = best;
  });
  return values;
}

double weak_lp_norm(const std::vector<double>& values, const std::vector<double>& weights, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("weak_lp_norm: p must be positive");
  if (values.size() != weights.size()) throw DimensionError("weak_lp_norm: values and weights differ in length");
  std::vector<std::pair<double, double>> vw;
  for (std::size_t i = 0; i < values.size(); ++i) vw.emplace_back(std::abs(values[i]), weights[i]);
  std::sort(vw.begin(), vw.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0;
  double cum = 0.0;
  for (std::size_t i = 0; i < vw.size(); ++i) {
    cum += vw[i].second;
    if (i + 1 < vw.size() && vw[i + 1].first == vw[i].first) continue;
    if (vw[i].first == 0.0) break;
    // lambda just below v: mu(|f| > lambda) = mass of values >= v.
    best = std::max(best, std::pow(vw[i].first, p) * cum);
  }
  return std::pow(best, 1.0 / p);
}

MaximalInequalityResult maximal_inequality_check(const PointMeasure& mu, int k, double alpha, double p,
                                                 const EllipsoidFamily& family) {
  if (family.mode != FamilyMode::doubling_dyadic) {
    throw std::invalid_argument("maximal_inequality_check: family must be doubling_dyadic");
  }
  const PointMeasure support = mu.support();
  const auto full = maximal_function(mu, k, alpha, family, support.points(), false);
  const auto core = maximal_function(mu, k, alpha * p / (p + 1.0), family, support.points(), true);
  std::vector<double> weights(support.weights().data(), support.weights().data() + support.size());
  MaximalInequalityResult r;
  r.lhs = *std::max_element(core.begin(), core.end());
  r.weak_norm = weak_lp_norm(full, weights, p);
  r.rhs = std::exp2(alpha * k) * std::pow(r.weak_norm, p / (p + 1.0));
  r.ok = r.lhs <= r.rhs;
  return r;
}

}  // namespace detcurve
