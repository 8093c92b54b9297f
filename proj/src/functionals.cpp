#include "detcurve/functionals.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "detcurve/parallel.hpp"

namespace detcurve {
namespace {

// One factor of a tuple sum: the atoms with positive mass and their masses
// (factor value times atom weight).
struct Level {
  MatrixX<double> points;
  VectorX<double> mass;
  double total_mass = 0.0;

  Index size() const { return points.cols(); }
  bool operator==(const Level& other) const {
    return points.rows() == other.points.rows() && points.cols() == other.points.cols() &&
           points == other.points && mass == other.mass;
  }
};

Level make_level(const PointMeasure& mu, const VectorX<double>& factor) {
  if (factor.size() != mu.size()) {
    throw DimensionError("functional: factor vector does not match atom count");
  }
  std::vector<Index> keep;
  for (Index i = 0; i < mu.size(); ++i) {
    if (!(factor(i) >= 0.0)) throw std::invalid_argument("functional: factors must be nonnegative");
    if (factor(i) * mu.weight(i) > 0.0) keep.push_back(i);
  }
  Level level;
  level.points.resize(mu.dim(), static_cast<Index>(keep.size()));
  level.mass.resize(static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    level.points.col(static_cast<Index>(j)) = mu.point(keep[j]);
    level.mass(static_cast<Index>(j)) = factor(keep[j]) * mu.weight(keep[j]);
  }
  level.total_mass = level.mass.sum();
  return level;
}

Level measure_level(const PointMeasure& mu) {
  return make_level(mu, VectorX<double>::Ones(mu.size()));
}

struct Stats {
  CompensatedSum included;
  CompensatedSum excluded;
  std::int64_t n_included = 0;
  std::int64_t n_excluded = 0;

  void merge(const Stats& other) {
    included.add(other.included);
    excluded.add(other.excluded);
    n_included += other.n_included;
    n_excluded += other.n_excluded;
  }
};

struct PowerKernel {
  double exponent;  // kernel det^exponent
  CompensatedSum sum;
  void include(double det, double mass) {
    sum.add(exponent == 0.0 ? mass : mass * std::pow(det, exponent));
  }
  void merge(const PowerKernel& other) { sum.add(other.sum); }
};

struct BandKernel {
  double delta;
  CompensatedSum sum;
  void include(double det, double mass) {
    if (det < delta) sum.add(mass);
  }
  void merge(const BandKernel& other) { sum.add(other.sum); }
};

struct LayerKernel {
  std::map<int, CompensatedSum> layers;
  void include(double det, double mass) { layers[std::ilogb(det)].add(mass); }
  void merge(const LayerKernel& other) {
    for (const auto& [l, s] : other.layers) layers[l].add(s);
  }
};

struct MomentKernel {
  double gamma;
  CompensatedSum positive;
  CompensatedSum negative;
  void include(double det, double mass) {
    const double p = std::pow(det, gamma);
    positive.add(mass * p);
    negative.add(mass / p);
  }
  void merge(const MomentKernel& other) {
    positive.add(other.positive);
    negative.add(other.negative);
  }
};

// Elementary symmetric sums of the tail masses: esym[r][i] is the sum over
// i <= i_1 < ... < i_r of prod mass(i_j); counts likewise.
struct TailTables {
  std::vector<std::vector<double>> esym;
  std::vector<std::vector<double>> count;

  TailTables(const VectorX<double>& mass, int depth) {
    const auto n = static_cast<std::size_t>(mass.size());
    esym.assign(static_cast<std::size_t>(depth) + 1, std::vector<double>(n + 1, 0.0));
    count = esym;
    for (std::size_t i = 0; i <= n; ++i) {
      esym[0][i] = 1.0;
      count[0][i] = 1.0;
    }
    for (int r = 1; r <= depth; ++r) {
      for (std::size_t i = n; i-- > 0;) {
        const auto rr = static_cast<std::size_t>(r);
        esym[rr][i] = esym[rr][i + 1] + mass(static_cast<Index>(i)) * esym[rr - 1][i + 1];
        count[rr][i] = count[rr][i + 1] + count[rr - 1][i + 1];
      }
    }
  }
};

// Enumerates k-tuples of vectors y_j - origin, one from each pinned level,
// carrying det(0, v_1..v_k) incrementally: each new vector multiplies the
// running determinant by its distance to the span of the previous ones.
// Subtrees whose Hadamard bound already falls below tau are excluded
// wholesale.
template <class Kernel>
class Sweep {
 public:
  Sweep(const std::vector<const Level*>& levels, bool symmetric, double tau, double multiplicity,
        Kernel& kernel, Stats& stats)
      : levels_(levels),
        k_(static_cast<int>(levels.size())),
        symmetric_(symmetric),
        tau_(tau),
        multiplicity_(multiplicity),
        kernel_(kernel),
        stats_(stats) {
    const Index d = levels.front()->points.rows();
    basis_.resize(d, k_);
    v_.resize(d);
    r_.resize(d);
    if (symmetric_) tails_.emplace(levels.front()->mass, k_);
    suffix_mass_.assign(static_cast<std::size_t>(k_) + 1, 1.0);
    suffix_count_.assign(static_cast<std::size_t>(k_) + 1, 1.0);
    for (int j = k_ - 1; j >= 0; --j) {
      suffix_mass_[static_cast<std::size_t>(j)] =
          suffix_mass_[static_cast<std::size_t>(j) + 1] * levels[static_cast<std::size_t>(j)]->total_mass;
      suffix_count_[static_cast<std::size_t>(j)] =
          suffix_count_[static_cast<std::size_t>(j) + 1] *
          static_cast<double>(levels[static_cast<std::size_t>(j)]->size());
    }
  }

  // Runs the sweep with the first vector fixed to atom `first` of level 0
  // (or of the base when `origin` is supplied separately).
  void run_from(const VectorX<double>& origin, double prefix_mass, Index start, double max_norm) {
    origin_ = &origin;
    max_norm_ = max_norm;
    descend(0, start, 1.0, prefix_mass);
  }

  void run_first(const VectorX<double>& origin, Index first, double max_norm) {
    origin_ = &origin;
    max_norm_ = max_norm;
    visit(0, first, 1.0, 1.0);
  }

 private:
  void descend(int level, Index start, double prefix_det, double prefix_mass) {
    const Index n = levels_[static_cast<std::size_t>(level)]->size();
    for (Index i = start; i < n; ++i) visit(level, i, prefix_det, prefix_mass);
  }

  void visit(int level, Index i, double prefix_det, double prefix_mass) {
    const Level& lv = *levels_[static_cast<std::size_t>(level)];
    const double mass = prefix_mass * lv.mass(i);
    v_ = lv.points.col(i) - *origin_;
    r_ = v_;
    if (level > 0) {
      auto u = basis_.leftCols(level);
      r_.noalias() -= u * (u.transpose() * v_);
      r_.noalias() -= u * (u.transpose() * r_);
    }
    const double rho = r_.norm();
    const double det = prefix_det * rho;
    if (level == k_ - 1) {
      if (det > tau_) {
        kernel_.include(det, mass * multiplicity_);
        stats_.included.add(mass * multiplicity_);
        stats_.n_included += static_cast<std::int64_t>(multiplicity_);
      } else {
        stats_.excluded.add(mass * multiplicity_);
        stats_.n_excluded += static_cast<std::int64_t>(multiplicity_);
      }
      return;
    }
    const int remaining = k_ - 1 - level;
    if (det * std::pow(max_norm_, remaining) <= tau_) {
      double sub_mass;
      double sub_count;
      if (symmetric_) {
        sub_mass = tails_->esym[static_cast<std::size_t>(remaining)][static_cast<std::size_t>(i) + 1];
        sub_count = tails_->count[static_cast<std::size_t>(remaining)][static_cast<std::size_t>(i) + 1];
      } else {
        sub_mass = suffix_mass_[static_cast<std::size_t>(level) + 1];
        sub_count = suffix_count_[static_cast<std::size_t>(level) + 1];
      }
      stats_.excluded.add(mass * sub_mass * multiplicity_);
      stats_.n_excluded += static_cast<std::int64_t>(sub_count * multiplicity_);
      return;
    }
    basis_.col(level) = r_ / rho;
    // The recursion reuses v_/r_, so nothing below may read them again.
    descend(level + 1, symmetric_ ? i + 1 : 0, det, mass);
  }

  const std::vector<const Level*>& levels_;
  int k_;
  bool symmetric_;
  double tau_;
  double multiplicity_;
  Kernel& kernel_;
  Stats& stats_;
  const VectorX<double>* origin_ = nullptr;
  double max_norm_ = 0.0;
  MatrixX<double> basis_;
  VectorX<double> v_;
  VectorX<double> r_;
  std::optional<TailTables> tails_;
  std::vector<double> suffix_mass_;
  std::vector<double> suffix_count_;
};

double max_norm_from(const std::vector<const Level*>& levels, const VectorX<double>& origin) {
  double best = 0.0;
  for (const Level* lv : levels) {
    if (lv->size() == 0) continue;
    best = std::max(best, (lv->points.colwise() - origin).colwise().norm().maxCoeff());
  }
  return best;
}

bool all_identical(const std::vector<const Level*>& levels) {
  for (std::size_t j = 1; j < levels.size(); ++j) {
    if (!(*levels[j] == *levels[0])) return false;
  }
  return true;
}

void check_budget(const std::vector<const Level*>& levels, std::int64_t budget) {
  double total = 1.0;
  for (const Level* lv : levels) total *= static_cast<double>(lv->size());
  if (total > static_cast<double>(budget)) {
    throw BudgetExceeded("exact enumeration of " + std::to_string(total) +
                         " tuples exceeds the budget of " + std::to_string(budget));
  }
}

template <class Kernel>
struct SweepOutput {
  Kernel kernel;
  Stats stats;
};

// Origin-pinned sum over levels[0] x ... x levels[k-1]. Chunks are the
// indices of the first factor; partial results are merged in chunk order.
template <class Kernel>
SweepOutput<Kernel> pinned_sum(const std::vector<const Level*>& levels, double tau, bool use_symmetry,
                               const Kernel& prototype) {
  const int k = static_cast<int>(levels.size());
  const bool symmetric = use_symmetry && k > 1 && all_identical(levels);
  const VectorX<double> origin = VectorX<double>::Zero(levels.front()->points.rows());
  const double max_norm = max_norm_from(levels, origin);
  const double multiplicity = symmetric ? factorial(k) : 1.0;
  const auto chunks = static_cast<std::size_t>(levels.front()->size());
  std::vector<SweepOutput<Kernel>> parts(chunks, SweepOutput<Kernel>{prototype, {}});
  parallel_for(chunks, [&](std::size_t c) {
    auto& part = parts[c];
    Sweep<Kernel> sweep(levels, symmetric, tau, multiplicity, part.kernel, part.stats);
    sweep.run_first(origin, static_cast<Index>(c), max_norm);
  });
  SweepOutput<Kernel> out{prototype, {}};
  for (const auto& part : parts) {
    out.kernel.merge(part.kernel);
    out.stats.merge(part.stats);
  }
  if (symmetric) {
    // Diagonal tuples (repeated atoms) are degenerate and never visited.
    double total = 1.0;
    for (const Level* lv : levels) total *= static_cast<double>(lv->size());
    const double visited = static_cast<double>(out.stats.n_included + out.stats.n_excluded);
    out.stats.n_excluded += static_cast<std::int64_t>(std::llround(total - visited));
    const double full = std::pow(levels.front()->total_mass, k);
    const double seen = out.stats.included.value() + out.stats.excluded.value();
    out.stats.excluded.add(std::max(0.0, full - seen));
  }
  return out;
}

double pinned_tau(const std::vector<const Level*>& levels, int k, const FunctionalOptions& options) {
  if (options.tau_det >= 0.0) return options.tau_det;
  double scale = 0.0;
  for (const Level* lv : levels) {
    if (lv->size() > 0) scale = std::max(scale, lv->points.colwise().norm().maxCoeff());
  }
  return 1e-12 * std::pow(scale, k);
}

FunctionalResult to_result(double value, const Stats& stats) {
  FunctionalResult r;
  r.value = value;
  r.included_mass = stats.included.value();
  r.excluded_mass = stats.excluded.value();
  r.tuples_excluded = stats.n_excluded;
  r.tuples_total = stats.n_included + stats.n_excluded;
  return r;
}

void check_k(const PointMeasure& mu, int k) {
  if (k < 1) throw std::invalid_argument("functional: k must be positive");
  (void)mu;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

// ---------------------------------------------------------------------------

FunctionalResult evaluate_T_tilde(const PointMeasure& mu, int k, double gamma,
                                  const std::vector<VectorX<double>>& fs,
                                  const FunctionalOptions& options) {
  check_k(mu, k);
  if (static_cast<int>(fs.size()) != k) throw std::invalid_argument("evaluate_T_tilde: need k factors");
  std::vector<Level> owned;
  owned.reserve(fs.size());
  for (const auto& f : fs) owned.push_back(make_level(mu, f));
  std::vector<const Level*> levels;
  for (const auto& lv : owned) levels.push_back(&lv);
  for (const Level* lv : levels) {
    if (lv->size() == 0) return FunctionalResult{};
  }
  check_budget(levels, options.budget);
  const double tau = pinned_tau(levels, k, options);
  const auto out = pinned_sum(levels, tau, options.use_symmetry, PowerKernel{-gamma, {}});
  return to_result(out.kernel.sum.value(), out.stats);
}

FunctionalResult evaluate_T(const PointMeasure& mu, int k, double gamma,
                            const std::vector<VectorX<double>>& fs, const FunctionalOptions& options) {
  check_k(mu, k);
  if (static_cast<int>(fs.size()) != k + 1) throw std::invalid_argument("evaluate_T: need k+1 factors");
  std::vector<Level> owned;
  owned.reserve(fs.size());
  for (const auto& f : fs) owned.push_back(make_level(mu, f));
  std::vector<const Level*> all;
  for (const auto& lv : owned) all.push_back(&lv);
  for (const Level* lv : all) {
    if (lv->size() == 0) return FunctionalResult{};
  }
  check_budget(all, options.budget);

  double tau = options.tau_det;
  if (tau < 0.0) {
    const VectorX<double> lo = mu.points().rowwise().minCoeff();
    const VectorX<double> hi = mu.points().rowwise().maxCoeff();
    tau = 1e-12 * std::pow((hi - lo).norm(), k);
  }

  const bool symmetric = options.use_symmetry && all_identical(all);
  const Level& base = *all.back();
  std::vector<const Level*> pinned(all.begin(), all.end() - 1);
  const double multiplicity = symmetric ? factorial(k + 1) : 1.0;
  const auto chunks = static_cast<std::size_t>(base.size());
  std::vector<SweepOutput<PowerKernel>> parts(chunks, SweepOutput<PowerKernel>{PowerKernel{-gamma, {}}, {}});
  parallel_for(chunks, [&](std::size_t c) {
    const auto b = static_cast<Index>(c);
    const VectorX<double> origin = base.points.col(b);
    auto& part = parts[c];
    Sweep<PowerKernel> sweep(pinned, symmetric, tau, multiplicity, part.kernel, part.stats);
    sweep.run_from(origin, base.mass(b), symmetric ? b + 1 : 0, max_norm_from(pinned, origin));
  });
  SweepOutput<PowerKernel> out{PowerKernel{-gamma, {}}, {}};
  for (const auto& part : parts) {
    out.kernel.merge(part.kernel);
    out.stats.merge(part.stats);
  }
  if (symmetric) {
    double total = 1.0;
    for (const Level* lv : all) total *= static_cast<double>(lv->size());
    const double visited = static_cast<double>(out.stats.n_included + out.stats.n_excluded);
    out.stats.n_excluded += static_cast<std::int64_t>(std::llround(total - visited));
    const double full = std::pow(base.total_mass, k + 1);
    const double seen = out.stats.included.value() + out.stats.excluded.value();
    out.stats.excluded.add(std::max(0.0, full - seen));
  }
  return to_result(out.kernel.sum.value(), out.stats);
}

double sublevel_I(const std::vector<PointMeasure>& mus, double delta, const FunctionalOptions& options) {
  if (mus.empty()) throw std::invalid_argument("sublevel_I: need at least one measure");
  const int k = static_cast<int>(mus.size());
  const Index d = mus.front().dim();
  std::vector<Level> owned;
  owned.reserve(mus.size());
  for (const auto& mu : mus) {
    if (mu.dim() != d) throw DimensionError("sublevel_I: measures of different dimension");
    owned.push_back(measure_level(mu));
  }
  std::vector<const Level*> levels;
  for (const auto& lv : owned) levels.push_back(&lv);
  for (const Level* lv : levels) {
    if (lv->size() == 0) return 0.0;
  }
  check_budget(levels, options.budget);
  const double tau = pinned_tau(levels, k, options);
  if (!(delta > tau)) return 0.0;
  const auto out = pinned_sum(levels, tau, options.use_symmetry, BandKernel{delta, {}});
  return out.kernel.sum.value();
}

VectorX<double> indicator(const PointMeasure& mu, const std::vector<Index>& set) {
  VectorX<double> f = VectorX<double>::Zero(mu.size());
  for (Index i : set) {
    if (i < 0 || i >= mu.size()) throw std::out_of_range("indicator: atom index out of range");
    f(i) = 1.0;
  }
  return f;
}

double set_mass(const PointMeasure& mu, const std::vector<Index>& set) {
  return indicator(mu, set).dot(mu.weights());
}

double DyadicProfile::reconstruct() const {
  CompensatedSum s;
  for (const auto& [l, m] : layers) s.add(std::exp2(-gamma * l) * m);
  return s.value();
}

std::pair<double, double> DyadicProfile::bracket() const {
  const double s = reconstruct();
  const double t = s * std::exp2(-gamma);
  return {std::min(s, t), std::max(s, t)};
}

DyadicProfile dyadic_profile(const PointMeasure& mu, int k, const SetFamily& sets, double gamma,
                             const FunctionalOptions& options) {
  check_k(mu, k);
  if (static_cast<int>(sets.size()) != k) throw std::invalid_argument("dyadic_profile: need k sets");
  std::vector<Level> owned;
  for (const auto& s : sets) owned.push_back(make_level(mu, indicator(mu, s)));
  std::vector<const Level*> levels;
  for (const auto& lv : owned) levels.push_back(&lv);
  DyadicProfile profile;
  profile.gamma = gamma;
  for (const Level* lv : levels) {
    if (lv->size() == 0) return profile;
  }
  check_budget(levels, options.budget);
  const double tau = pinned_tau(levels, k, options);
  const auto out = pinned_sum(levels, tau, options.use_symmetry, LayerKernel{});
  for (const auto& [l, s] : out.kernel.layers) profile.layers[l] = s.value();
  if (!profile.layers.empty()) {
    profile.l_min = profile.layers.begin()->first;
    profile.l_max = profile.layers.rbegin()->first;
  }
  profile.included_mass = out.stats.included.value();
  profile.excluded_mass = out.stats.excluded.value();
  return profile;
}

CauchySchwarzResult cauchy_schwarz_check(const PointMeasure& mu, int k, double gamma,
                                         const SetFamily& sets, const FunctionalOptions& options) {
  check_k(mu, k);
  if (static_cast<int>(sets.size()) != k) throw std::invalid_argument("cauchy_schwarz_check: need k sets");
  std::vector<Level> owned;
  for (const auto& s : sets) owned.push_back(make_level(mu, indicator(mu, s)));
  std::vector<const Level*> levels;
  for (const auto& lv : owned) levels.push_back(&lv);
  CauchySchwarzResult r;
  for (const Level* lv : levels) {
    if (lv->size() == 0) {
      r.ok = true;
      return r;
    }
  }
  check_budget(levels, options.budget);
  const double tau = pinned_tau(levels, k, options);
  const auto out = pinned_sum(levels, tau, options.use_symmetry, MomentKernel{gamma, {}, {}});
  r.included_mass = out.stats.included.value();
  r.positive_moment = out.kernel.positive.value();
  r.negative_moment = out.kernel.negative.value();
  r.lhs = r.included_mass * r.included_mass;
  r.rhs = r.positive_moment * r.negative_moment;
  r.ok = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

FunctionalResult monte_carlo_T(const PointMeasure& mu, int k, double gamma,
                               const std::vector<VectorX<double>>& fs, std::int64_t samples,
                               std::uint64_t seed, const FunctionalOptions& options) {
  check_k(mu, k);
  if (samples < 1) throw std::invalid_argument("monte_carlo_T: samples must be positive");
  if (static_cast<int>(fs.size()) != k + 1) throw std::invalid_argument("monte_carlo_T: need k+1 factors");
  for (const auto& f : fs) {
    if (f.size() != mu.size()) throw DimensionError("monte_carlo_T: factor vector does not match atom count");
  }
  const Index n = mu.size();
  double tau = options.tau_det;
  if (tau < 0.0) {
    const VectorX<double> lo = mu.points().rowwise().minCoeff();
    const VectorX<double> hi = mu.points().rowwise().maxCoeff();
    tau = 1e-12 * std::pow((hi - lo).norm(), k);
  }
  const double volume = std::pow(static_cast<double>(n), k + 1);

  constexpr std::int64_t kBlock = 4096;
  const auto blocks = static_cast<std::size_t>((samples + kBlock - 1) / kBlock);
  struct Part {
    CompensatedSum sum, sum_sq, included, excluded;
    std::int64_t n_excluded = 0;
  };
  std::vector<Part> parts(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(b)));
    std::uniform_int_distribution<Index> pick(0, n - 1);
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
    const std::int64_t end = std::min<std::int64_t>(samples, begin + kBlock);
    MatrixX<double> edges(mu.dim(), k);
    std::vector<Index> idx(static_cast<std::size_t>(k) + 1);
    auto& part = parts[b];
    for (std::int64_t s = begin; s < end; ++s) {
      double weight = volume;
      for (int j = 0; j <= k; ++j) {
        idx[static_cast<std::size_t>(j)] = pick(rng);
        const Index i = idx[static_cast<std::size_t>(j)];
        weight *= fs[static_cast<std::size_t>(j)](i) * mu.weight(i);
      }
      const auto base = mu.point(idx.back());
      for (int j = 0; j < k; ++j) edges.col(j) = mu.point(idx[static_cast<std::size_t>(j)]) - base;
      const double det = gram_volume(edges);
      double x = 0.0;
      if (det > tau) {
        x = gamma == 0.0 ? weight : weight * std::pow(det, -gamma);
        part.included.add(weight);
      } else {
        part.excluded.add(weight);
        ++part.n_excluded;
      }
      part.sum.add(x);
      part.sum_sq.add(x * x);
    }
  });
  Part total;
  for (const auto& p : parts) {
    total.sum.add(p.sum);
    total.sum_sq.add(p.sum_sq);
    total.included.add(p.included);
    total.excluded.add(p.excluded);
    total.n_excluded += p.n_excluded;
  }
  const auto ns = static_cast<double>(samples);
  const double mean = total.sum.value() / ns;
  const double var = samples > 1 ? std::max(0.0, (total.sum_sq.value() - ns * mean * mean) / (ns - 1.0)) : 0.0;
  FunctionalResult r;
  r.value = mean;
  r.std_error = std::sqrt(var / ns);
  r.tuples_total = samples;
  r.tuples_excluded = total.n_excluded;
  r.included_mass = total.included.value() / ns;
  r.excluded_mass = total.excluded.value() / ns;
  return r;
}

// ---------------------------------------------------------------------------

std::string to_string(SetSampler sampler) {
  switch (sampler) {
    case SetSampler::random_subset: return "random_subset";
    case SetSampler::ball: return "ball";
    case SetSampler::halfspace: return "halfspace";
    case SetSampler::ellipsoid_shell: return "ellipsoid_shell";
    case SetSampler::mixed: return "mixed";
  }
  return "unknown";
}

SetSampler set_sampler_from_string(const std::string& name) {
  if (name == "random_subset") return SetSampler::random_subset;
  if (name == "ball") return SetSampler::ball;
  if (name == "halfspace") return SetSampler::halfspace;
  if (name == "ellipsoid_shell") return SetSampler::ellipsoid_shell;
  if (name == "mixed") return SetSampler::mixed;
  throw std::invalid_argument("unknown set sampler '" + name + "'");
}

double rwt_ratio(const PointMeasure& mu, int k, double gamma, double alpha, const SetFamily& sets,
                 const FunctionalOptions& options) {
  std::vector<VectorX<double>> fs;
  double rhs = 1.0;
  for (const auto& s : sets) {
    fs.push_back(indicator(mu, s));
    rhs *= std::pow(set_mass(mu, s), 1.0 - gamma / (k * alpha));
  }
  if (!(rhs > 0.0)) return 0.0;
  return evaluate_T_tilde(mu, k, gamma, fs, options).value / rhs;
}

namespace {

std::vector<Index> sample_set(const PointMeasure& mu, const std::vector<Index>& support,
                              SetSampler kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, support.size() - 1);
  const Index d = mu.dim();
  std::vector<Index> out;
  Index fallback = support[pick(rng)];
  switch (kind) {
    case SetSampler::random_subset: {
      const double q = 0.02 + 0.98 * unit(rng);
      for (Index i : support) {
        if (unit(rng) < q) out.push_back(i);
      }
      break;
    }
    case SetSampler::ball: {
      const VectorX<double> center = mu.point(fallback);
      const double radius = (mu.point(support[pick(rng)]) - center).norm() * (0.25 + unit(rng));
      for (Index i : support) {
        if ((mu.point(i) - center).norm() <= radius) out.push_back(i);
      }
      break;
    }
    case SetSampler::halfspace: {
      std::normal_distribution<double> normal;
      VectorX<double> u(d);
      for (Index j = 0; j < d; ++j) u(j) = normal(rng);
      u.normalize();
      const double threshold = u.dot(mu.point(support[pick(rng)]));
      fallback = support.front();
      double best = std::numeric_limits<double>::infinity();
      for (Index i : support) {
        const double t = u.dot(mu.point(i));
        if (t <= threshold) out.push_back(i);
        if (t < best) {
          best = t;
          fallback = i;
        }
      }
      break;
    }
    case SetSampler::ellipsoid_shell: {
      std::normal_distribution<double> normal;
      MatrixX<double> g(d, d);
      for (Index a = 0; a < d; ++a) {
        for (Index b = 0; b < d; ++b) g(a, b) = normal(rng);
      }
      Eigen::HouseholderQR<MatrixX<double>> qr(g);
      const MatrixX<double> frame = qr.householderQ();
      const double scale = std::max(max_radius(mu), 1e-300);
      VectorX<double> lengths(d);
      for (Index j = 0; j < d; ++j) lengths(j) = scale * std::exp2(-5.0 * unit(rng));
      const auto b = Ellipsoidd::from_lengths(VectorX<double>::Zero(d), frame, lengths);
      const double s1 = unit(rng);
      const double s2 = s1 + 0.1 + unit(rng);
      for (Index i : support) {
        const double gval = gauge(b, mu.point(i));
        if (gval > s1 && gval <= s2) out.push_back(i);
      }
      break;
    }
    case SetSampler::mixed: break;
  }
  if (out.empty()) out.push_back(fallback);
  return out;
}

}  // namespace

RwtProbeResult rwt_probe(const PointMeasure& mu, int k, double gamma, double alpha, SetSampler sampler,
                         int trials, std::uint64_t seed, const FunctionalOptions& options) {
  if (!(gamma > 0.0 && gamma < alpha)) throw std::invalid_argument("rwt_probe: need 0 < gamma < alpha");
  std::vector<Index> support;
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) > 0.0) support.push_back(i);
  }
  if (support.empty()) throw std::invalid_argument("rwt_probe: measure has no mass");
  constexpr SetSampler kCycle[] = {SetSampler::random_subset, SetSampler::ball, SetSampler::halfspace,
                                   SetSampler::ellipsoid_shell};
  std::mt19937_64 rng(seed);
  RwtProbeResult result;
  result.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const SetSampler kind = sampler == SetSampler::mixed ? kCycle[t % 4] : sampler;
    SetFamily sets;
    for (int j = 0; j < k; ++j) sets.push_back(sample_set(mu, support, kind, rng));
    std::vector<VectorX<double>> fs;
    double rhs = 1.0;
    for (const auto& s : sets) {
      fs.push_back(indicator(mu, s));
      rhs *= std::pow(set_mass(mu, s), 1.0 - gamma / (k * alpha));
    }
    const double lhs = evaluate_T_tilde(mu, k, gamma, fs, options).value;
    const double ratio = lhs / rhs;
    if (ratio > result.sup_ratio || result.witness_sets.empty()) {
      result.sup_ratio = ratio;
      result.witness_kind = to_string(kind);
      result.witness_sets = std::move(sets);
      result.witness_lhs = lhs;
      result.witness_rhs = rhs;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

double sublevel_scale_constant(int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  return std::exp2(-0.5 * (k - 1) * (k + 2));
}

double sublevel_mass_constant(int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  return std::pow(4.0, k - 1) * factorial(k);
}

double corollary_mass_constant(int k) {
  return std::pow(static_cast<double>(k), k) / factorial(k) * sublevel_mass_constant(k);
}

namespace {

struct SeriesCoefficients {
  double a;  // multiplies 2^((alpha-gamma) l0)
  double b;  // multiplies 2^(-gamma l0)
};

SeriesCoefficients series_coefficients(int k, double alpha, double gamma, double curvature_constant,
                                       double set_mass_product) {
  if (!(gamma > 0.0 && gamma < alpha)) throw std::invalid_argument("rwt series: need 0 < gamma < alpha");
  const double layer_k = corollary_mass_constant(k) * std::pow(sublevel_scale_constant(k), -alpha) *
                         curvature_constant;
  const double p = set_mass_product;
  return {layer_k * std::exp2(alpha) * std::pow(p, 1.0 - 1.0 / k) / (std::exp2(alpha - gamma) - 1.0),
          p / (1.0 - std::exp2(-gamma))};
}

}  // namespace

double rwt_series_constant(int k, double alpha, double gamma) {
  const auto c = series_coefficients(k, alpha, gamma, 1.0, 1.0);
  const double continuous = alpha / (alpha - gamma) * std::pow(c.b, 1.0 - gamma / alpha) *
                            std::pow((alpha - gamma) * c.a / gamma, gamma / alpha);
  return std::exp2(alpha - gamma) * continuous;
}

double rwt_crossover_bound(int k, double alpha, double gamma, double curvature_constant,
                           double set_mass_product) {
  const auto c = series_coefficients(k, alpha, gamma, curvature_constant, set_mass_product);
  const double x_star = std::pow(gamma * c.b / ((alpha - gamma) * c.a), 1.0 / alpha);
  const int center = static_cast<int>(std::floor(std::log2(x_star)));
  double best = std::numeric_limits<double>::infinity();
  for (int l0 = center - 2; l0 <= center + 3; ++l0) {
    best = std::min(best, c.a * std::exp2((alpha - gamma) * l0) + c.b * std::exp2(-gamma * l0));
  }
  return best;
}

}  // namespace detcurve
