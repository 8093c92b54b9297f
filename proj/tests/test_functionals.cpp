#include <random>

#include "detcurve/functionals.hpp"
#include "detcurve/parallel.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace detcurve;

namespace {

PointMeasure random_measure(int d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(0.5, 1.5);
  MatrixX<double> p(d, n);
  VectorX<double> w(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) p(i, j) = normal(rng);
    w(j) = u(rng);
  }
  return PointMeasure(p, w / w.sum());
}

VectorX<double> random_factor(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorX<double> f(n);
  for (int i = 0; i < n; ++i) f(i) = u(rng) < 0.2 ? 0.0 : u(rng);
  return f;
}

auto power(double gamma) {
  return [gamma](double det) { return std::pow(det, -gamma); };
}

}  // namespace

TEST_CASE("T~ agrees with brute-force enumeration") {
  std::mt19937_64 rng(1);
  for (int k = 1; k <= 3; ++k) {
    const auto mu = random_measure(3, 9, 10 + k);
    for (double gamma : {0.5, -1.0, 0.0}) {
      std::vector<VectorX<double>> fs;
      for (int j = 0; j < k; ++j) fs.push_back(random_factor(9, rng));
      FunctionalOptions opt;
      opt.tau_det = 1e-9;
      const auto r = evaluate_T_tilde(mu, k, gamma, fs, opt);
      const double expected = oracle::tuple_sum(mu.points(), mu.weights(), fs, true, 1e-9, power(gamma));
      CHECK(r.value == doctest::Approx(expected).epsilon(1e-11));
    }
  }
}

TEST_CASE("T agrees with brute-force enumeration") {
  std::mt19937_64 rng(2);
  for (int k = 1; k <= 3; ++k) {
    const auto mu = random_measure(3, 7, 20 + k);
    std::vector<VectorX<double>> fs;
    for (int j = 0; j <= k; ++j) fs.push_back(random_factor(7, rng));
    FunctionalOptions opt;
    opt.tau_det = 1e-9;
    const auto r = evaluate_T(mu, k, 0.5, fs, opt);
    const double expected = oracle::tuple_sum(mu.points(), mu.weights(), fs, false, 1e-9, power(0.5));
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("symmetric and ordered enumeration agree") {
  const auto mu = random_measure(3, 10, 3);
  for (int k = 1; k <= 3; ++k) {
    const std::vector<VectorX<double>> ones(static_cast<std::size_t>(k), VectorX<double>::Ones(10));
    FunctionalOptions sym, full;
    full.use_symmetry = false;
    const auto a = evaluate_T_tilde(mu, k, 0.5, ones, sym);
    const auto b = evaluate_T_tilde(mu, k, 0.5, ones, full);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
    CHECK(a.tuples_total == b.tuples_total);
    CHECK(a.tuples_excluded == b.tuples_excluded);
    CHECK(a.included_mass == doctest::Approx(b.included_mass).epsilon(1e-12));
    CHECK(a.included_mass + a.excluded_mass == doctest::Approx(1.0));

    std::vector<VectorX<double>> ones_t(static_cast<std::size_t>(k) + 1, VectorX<double>::Ones(10));
    const auto c = evaluate_T(mu, k, 0.5, ones_t, sym);
    const auto d = evaluate_T(mu, k, 0.5, ones_t, full);
    CHECK(c.value == doctest::Approx(d.value).epsilon(1e-12));
    CHECK(c.tuples_excluded == d.tuples_excluded);
  }
}

TEST_CASE("diagonal tuples are counted as degenerate") {
  const auto mu = random_measure(2, 6, 4);
  const auto r = evaluate_T_tilde(mu, 2, 0.5, {VectorX<double>::Ones(6), VectorX<double>::Ones(6)});
  CHECK(r.tuples_total == 36);
  CHECK(r.tuples_excluded == 6);
  CHECK(r.excluded_mass == doctest::Approx(mu.weights().squaredNorm()));
}

TEST_CASE("T is translation invariant and homogeneous under dilation") {
  const auto mu = random_measure(2, 8, 5);
  const std::vector<VectorX<double>> ones(3, VectorX<double>::Ones(8));
  const double base = evaluate_T(mu, 2, 0.5, ones).value;
  const VectorX<double> shift = (VectorX<double>(2) << 3.0, -2.0).finished();
  CHECK(evaluate_T(translate(mu, shift), 2, 0.5, ones).value == doctest::Approx(base).epsilon(1e-10));
  // det scales by a^k, so T scales by a^(-k gamma).
  CHECK(evaluate_T(dilate(mu, 4.0), 2, 0.5, ones).value == doctest::Approx(base / 4.0).epsilon(1e-10));
  const std::vector<VectorX<double>> ones_k(2, VectorX<double>::Ones(8));
  const double tilde = evaluate_T_tilde(mu, 2, 0.5, ones_k).value;
  CHECK(evaluate_T_tilde(dilate(mu, 4.0), 2, 0.5, ones_k).value == doctest::Approx(tilde / 4.0).epsilon(1e-10));
}

TEST_CASE("sublevel_I agrees with brute-force enumeration") {
  const auto a = random_measure(2, 8, 6);
  const auto b = random_measure(2, 7, 7);
  for (double delta : {0.05, 0.3, 1.0, 10.0}) {
    // Product mass of pairs with 0 < det(0, y1, y2) < delta.
    double expected = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
      for (Index j = 0; j < b.size(); ++j) {
        const double det = oracle::gram_det({a.point(i), b.point(j), oracle::Vec::Zero(2)});
        if (det > 1e-12 && det < delta) expected += a.weight(i) * b.weight(j);
      }
    }
    CHECK(sublevel_I({a, b}, delta) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(sublevel_I({a, a}, delta) ==
          doctest::Approx(oracle::tuple_sum(a.points(), a.weights(), {VectorX<double>::Ones(8), VectorX<double>::Ones(8)},
                                            true, 1e-12 * std::pow(max_radius(a), 2),
                                            [delta](double det) { return det < delta ? 1.0 : 0.0; }))
              .epsilon(1e-12));
  }
  CHECK(sublevel_I({a, b}, 0.0) == 0.0);
  CHECK_THROWS_AS(sublevel_I({a, random_measure(3, 4, 1)}, 1.0), DimensionError);
}

TEST_CASE("exact enumeration respects the budget") {
  const auto mu = random_measure(2, 50, 8);
  FunctionalOptions opt;
  opt.budget = 1000;
  CHECK_THROWS_AS(evaluate_T_tilde(mu, 2, 0.5, {VectorX<double>::Ones(50), VectorX<double>::Ones(50)}, opt),
                  BudgetExceeded);
  CHECK_THROWS_AS(sublevel_I({mu, mu}, 1.0, opt), BudgetExceeded);
  CHECK_THROWS_AS(evaluate_T_tilde(mu, 2, 0.5, {VectorX<double>::Ones(49), VectorX<double>::Ones(50)}),
                  DimensionError);
}

TEST_CASE("Monte Carlo estimate is unbiased and its error shrinks like 1/sqrt(n)") {
  const auto mu = random_measure(2, 30, 9);
  const std::vector<VectorX<double>> ones(3, VectorX<double>::Ones(30));
  const double exact = evaluate_T(mu, 2, 0.3, ones).value;
  const auto small = monte_carlo_T(mu, 2, 0.3, ones, 20000, 1);
  const auto big = monte_carlo_T(mu, 2, 0.3, ones, 80000, 1);
  CHECK(std::abs(small.value - exact) <= 4.0 * *small.std_error);
  CHECK(std::abs(big.value - exact) <= 4.0 * *big.std_error);
  CHECK(*big.std_error / *small.std_error == doctest::Approx(0.5).epsilon(0.2));

  set_thread_count(1);
  const auto one = monte_carlo_T(mu, 2, 0.3, ones, 30000, 5);
  set_thread_count(4);
  const auto four = monte_carlo_T(mu, 2, 0.3, ones, 30000, 5);
  set_thread_count(0);
  CHECK(one.value == four.value);
  CHECK(*one.std_error == *four.std_error);
}

TEST_CASE("dyadic profile brackets T~") {
  const auto mu = random_measure(3, 12, 10);
  const SetFamily sets{{0, 1, 2, 3, 4, 5, 6}, {3, 4, 5, 6, 7, 8, 9, 10, 11}};
  for (double gamma : {0.7, -0.5}) {
    const auto profile = dyadic_profile(mu, 2, sets, gamma);
    const double t = evaluate_T_tilde(mu, 2, gamma, {indicator(mu, sets[0]), indicator(mu, sets[1])}).value;
    const auto [lo, hi] = profile.bracket();
    CHECK(lo <= t * (1 + 1e-12));
    CHECK(t <= hi * (1 + 1e-12));
    double layered = 0.0;
    for (const auto& [l, m] : profile.layers) layered += m;
    CHECK(layered == doctest::Approx(profile.included_mass).epsilon(1e-12));
    CHECK(profile.included_mass + profile.excluded_mass ==
          doctest::Approx(set_mass(mu, sets[0]) * set_mass(mu, sets[1])));
  }
}

TEST_CASE("Cauchy-Schwarz check") {
  const auto mu = random_measure(2, 15, 11);
  const SetFamily sets{{0, 2, 4, 6, 8, 10}, {1, 3, 5, 7, 9, 11, 13}};
  const auto r = cauchy_schwarz_check(mu, 2, 0.6, sets);
  CHECK(r.ok);
  CHECK(r.lhs <= r.rhs);
  const double neg = evaluate_T_tilde(mu, 2, 0.6, {indicator(mu, sets[0]), indicator(mu, sets[1])}).value;
  const double pos = evaluate_T_tilde(mu, 2, -0.6, {indicator(mu, sets[0]), indicator(mu, sets[1])}).value;
  CHECK(r.negative_moment == doctest::Approx(neg).epsilon(1e-12));
  CHECK(r.positive_moment == doctest::Approx(pos).epsilon(1e-12));
}

TEST_CASE("constants") {
  CHECK(sublevel_scale_constant(1) == 1.0);
  CHECK(sublevel_scale_constant(2) == 0.25);
  CHECK(sublevel_scale_constant(3) == doctest::Approx(1.0 / 32));
  CHECK(sublevel_mass_constant(1) == 1.0);
  CHECK(sublevel_mass_constant(2) == 8.0);
  CHECK(sublevel_mass_constant(3) == 96.0);
  CHECK(corollary_mass_constant(2) == doctest::Approx(16.0));
  CHECK(corollary_mass_constant(3) == doctest::Approx(432.0));
  CHECK_THROWS(sublevel_mass_constant(0));
}

TEST_CASE("crossover bound is dominated by the series constant") {
  for (const auto& [k, alpha, gamma] : {std::tuple{2, 1.0, 0.5}, std::tuple{3, 1.5, 0.4}, std::tuple{2, 2.0, 1.5}}) {
    const double c = rwt_series_constant(k, alpha, gamma);
    for (double m : {0.01, 1.0, 37.0}) {
      for (double p : {1e-6, 0.01, 1.0}) {
        const double bound = rwt_crossover_bound(k, alpha, gamma, m, p);
        CHECK(bound > 0.0);
        CHECK(bound <= c * std::pow(m, gamma / alpha) * std::pow(p, 1.0 - gamma / (k * alpha)) * (1 + 1e-12));
      }
    }
  }
  CHECK(rwt_series_constant(2, 1.0, 0.5) == doctest::Approx(92.0).epsilon(0.01));
  CHECK_THROWS(rwt_series_constant(2, 1.0, 1.5));
}

TEST_CASE("rwt probe") {
  const auto mu = random_measure(2, 20, 12);
  const auto a = rwt_probe(mu, 2, 0.5, 1.0, SetSampler::mixed, 12, 3);
  const auto b = rwt_probe(mu, 2, 0.5, 1.0, SetSampler::mixed, 12, 3);
  CHECK(a.sup_ratio == b.sup_ratio);
  CHECK(a.witness_sets == b.witness_sets);
  CHECK(a.sup_ratio > 0.0);
  CHECK(a.sup_ratio == doctest::Approx(rwt_ratio(mu, 2, 0.5, 1.0, a.witness_sets)).epsilon(1e-12));
  CHECK(a.sup_ratio == doctest::Approx(a.witness_lhs / a.witness_rhs));
  for (auto s : {SetSampler::random_subset, SetSampler::ball, SetSampler::halfspace, SetSampler::ellipsoid_shell}) {
    CHECK(set_sampler_from_string(to_string(s)) == s);
    CHECK(rwt_probe(mu, 2, 0.5, 1.0, s, 3, 1).witness_sets.size() == 2);
  }

  // On a line through the origin every tuple is degenerate.
  GeneratorSpec line;
  line.family = GeneratorFamily::subspace_lebesgue;
  line.count = 16;
  line.params = {{"m", 1}};
  const auto flat = generate(line);
  CHECK(rwt_probe(flat, 2, 0.5, 1.0, SetSampler::mixed, 8, 1).sup_ratio == 0.0);
  CHECK_THROWS(rwt_probe(mu, 2, 1.0, 1.0, SetSampler::ball, 1, 1));
}

TEST_CASE("parallel evaluation does not depend on the thread count") {
  const auto mu = random_measure(3, 25, 13);
  const std::vector<VectorX<double>> ones(3, VectorX<double>::Ones(25));
  set_thread_count(1);
  const auto one = evaluate_T_tilde(mu, 3, 0.5, ones);
  const auto one_t = evaluate_T(mu, 2, 0.5, ones);
  set_thread_count(3);
  const auto three = evaluate_T_tilde(mu, 3, 0.5, ones);
  const auto three_t = evaluate_T(mu, 2, 0.5, ones);
  set_thread_count(0);
  CHECK(one.value == three.value);
  CHECK(one.excluded_mass == three.excluded_mass);
  CHECK(one_t.value == three_t.value);
}
