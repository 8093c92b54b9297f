#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detcurve/measure.hpp"
#include "detcurve/parallel.hpp"
#include "doctest.h"

using namespace detcurve;

namespace {

PointMeasure four_atoms() {
  MatrixX<double> p(2, 4);
  p << 0.0, 1.0, 0.0, 3.0,
       0.0, 0.0, 2.0, 4.0;
  return PointMeasure(p, (VectorX<double>(4) << 0.1, 0.2, 0.3, 0.4).finished());
}

}  // namespace

TEST_CASE("measure construction validates input") {
  MatrixX<double> p(2, 2);
  p << 0, 1,
       0, 1;
  CHECK_NOTHROW(PointMeasure(p, VectorX<double>::Constant(2, 0.5)));
  CHECK_THROWS_AS(PointMeasure(p, VectorX<double>::Ones(3)), DimensionError);
  CHECK_THROWS(PointMeasure(p, (VectorX<double>(2) << 1.0, -0.5).finished()));
  MatrixX<double> bad = p;
  bad(0, 0) = std::nan("");
  CHECK_THROWS(PointMeasure(bad, VectorX<double>::Ones(2)));
  CHECK(PointMeasure::uniform(p).mass() == doctest::Approx(1.0));
}

TEST_CASE("eval_measure and restriction") {
  const auto mu = four_atoms();
  const auto ball = Ellipsoidd::ball(VectorX<double>::Zero(2), 2.0);
  CHECK(eval_measure(mu, ball) == doctest::Approx(0.6));
  const auto r = restrict_normalize(mu, [&](const auto& y) { return ellipsoid_contains(ball, y); });
  CHECK(r.size() == 3);
  CHECK(r.mass() == doctest::Approx(1.0));
  CHECK(r.weight(2) == doctest::Approx(0.5));
  CHECK_THROWS(restrict_normalize(mu, [](const auto& y) { return y(0) > 10.0; }));
}

TEST_CASE("dilation, translation, push-forward and mixtures") {
  const auto mu = four_atoms();
  const auto big = dilate(mu, 3.0);
  CHECK(big.point(3)(1) == doctest::Approx(12.0));
  CHECK(big.weights() == mu.weights());
  CHECK_THROWS(dilate(mu, 0.0));

  const auto moved = translate(mu, VectorX<double>::Ones(2));
  CHECK(moved.point(0)(0) == 1.0);
  CHECK_THROWS_AS(translate(mu, VectorX<double>::Ones(3)), DimensionError);

  MatrixX<double> proj(1, 2);
  proj << 1.0, 0.0;
  const auto line = pushforward(mu, proj);
  CHECK(line.dim() == 1);
  CHECK(line.point(3)(0) == 3.0);
  CHECK_THROWS_AS(pushforward(mu, MatrixX<double>::Identity(3, 3)), DimensionError);

  const auto mix = mixture<double>({mu, big}, {0.25, 0.75});
  CHECK(mix.size() == 8);
  CHECK(mix.mass() == doctest::Approx(1.0));
  CHECK(mix.weight(4) == doctest::Approx(0.075));
}

TEST_CASE("radial split has exact masses and is supported outside r0") {
  GeneratorSpec spec;
  spec.family = GeneratorFamily::cube_lebesgue;
  spec.count = 100;
  const auto mu = generate(spec);
  for (double eps : {0.05, 0.1, 0.37, 0.5, 1.0}) {
    const auto s = radial_split(mu, eps);
    CHECK(s.outer.mass() == doctest::Approx(eps).epsilon(1e-12));
    CHECK(s.inner.mass() == doctest::Approx(1.0 - eps).epsilon(1e-9));
    CHECK((s.outer.weights() + s.inner.weights() - mu.weights()).cwiseAbs().maxCoeff() < 1e-15);
    for (Index i = 0; i < mu.size(); ++i) {
      if (s.outer.weight(i) > 0.0) CHECK(mu.point(i).norm() >= s.radius);
      if (s.inner.weight(i) > 0.0) CHECK(mu.point(i).norm() <= s.radius);
    }
  }
  CHECK_THROWS(radial_split(mu, 0.0));
  CHECK_THROWS(radial_split(PointMeasure(mu.points(), 2.0 * mu.weights()), 0.5));
}

TEST_CASE("radial split divides tied atoms proportionally") {
  MatrixX<double> p(2, 3);
  p << 1.0, 0.0, 0.0,
       0.0, 1.0, 0.0;
  const PointMeasure mu(p, (VectorX<double>(3) << 0.25, 0.25, 0.5).finished());
  const auto s = radial_split(mu, 0.25);
  CHECK(s.radius == 1.0);
  CHECK(s.outer.weight(0) == doctest::Approx(0.125));
  CHECK(s.outer.weight(1) == doctest::Approx(0.125));
  CHECK(s.outer.weight(2) == 0.0);

  // eps = 1 takes everything; with an atom at the origin the radius is 0.
  const auto all = radial_split(mu, 1.0);
  CHECK(all.radius == 0.0);
  CHECK(all.inner.mass() == doctest::Approx(0.0));
}

TEST_CASE("generators") {
  GeneratorSpec cube;
  cube.family = GeneratorFamily::cube_lebesgue;
  cube.count = 16;
  const auto c = generate(cube);
  CHECK(c.size() == 16);
  CHECK(c.points().minCoeff() == doctest::Approx(0.125));
  CHECK(c.points().maxCoeff() == doctest::Approx(0.875));
  cube.count = 15;
  CHECK_THROWS_AS(generate(cube), ConfigError);
  cube.params["halton"] = 1;
  CHECK(generate(cube).size() == 15);

  GeneratorSpec sphere;
  sphere.family = GeneratorFamily::sphere_uniform;
  sphere.dim = 3;
  sphere.count = 50;
  const auto s = generate(sphere);
  for (Index i = 0; i < s.size(); ++i) CHECK(s.point(i).norm() == doctest::Approx(1.0));
  CHECK(generate(sphere) == s);
  sphere.seed = 2;
  CHECK(!(generate(sphere) == s));
  sphere.params["fibonacci"] = 1;
  CHECK(generate(sphere).point(0).norm() == doctest::Approx(1.0));

  GeneratorSpec flat;
  flat.family = GeneratorFamily::subspace_lebesgue;
  flat.dim = 3;
  flat.count = 9;
  flat.params = {{"m", 2}, {"offset", 0.5}};
  const auto f = generate(flat);
  CHECK(f.points().row(2).isConstant(0.5));

  GeneratorSpec curve;
  curve.family = GeneratorFamily::moment_curve;
  curve.dim = 3;
  curve.count = 10;
  curve.params = {{"density_exponent", 1.0}};
  const auto m = generate(curve);
  CHECK(m.mass() == doctest::Approx(1.0));
  CHECK(m.point(4)(2) == doctest::Approx(std::pow(m.point(4)(0), 3)));
  CHECK(m.weight(9) > m.weight(0));

  CHECK(generator_family_from_string(to_string(GeneratorFamily::moment_curve)) == GeneratorFamily::moment_curve);
  CHECK_THROWS_AS(generator_family_from_string("torus"), ConfigError);
}

TEST_CASE("nearest-neighbour spacing and radius") {
  GeneratorSpec cube;
  cube.count = 64;
  const auto c = generate(cube);
  CHECK(median_nearest_neighbor(c) == doctest::Approx(0.125));
  CHECK(max_radius(c) == doctest::Approx(std::sqrt(2.0) * 15.0 / 16.0));
}

TEST_CASE("flat mass diagnostic") {
  GeneratorSpec line;
  line.family = GeneratorFamily::subspace_lebesgue;
  line.count = 20;
  line.params = {{"m", 1}};
  CHECK(flat_mass_diagnostic(generate(line), 2, 1000, 1) == doctest::Approx(1.0));

  GeneratorSpec cube;
  cube.count = 16;
  CHECK(flat_mass_diagnostic(generate(cube), 2, 1000, 1) == doctest::Approx(0.25));
  // k = 1: a single atom.
  CHECK(flat_mass_diagnostic(generate(cube), 1, 1000, 1) == doctest::Approx(1.0 / 16));
}

TEST_CASE("parallel helpers") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 10; ++i) s.add(1e-16);
  CHECK(s.value() == doctest::Approx(1.0 + 1e-15).epsilon(1e-17));

  set_thread_count(3);
  CHECK(thread_count() == 3);
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
                  std::runtime_error);
  set_thread_count(0);
}
