#include <filesystem>
#include <fstream>
#include <sstream>

#include "detcurve/lab.hpp"
#include "detcurve/parallel.hpp"
#include "doctest.h"

using namespace detcurve;

namespace {

ScenarioConfig small_cube() {
  auto j = bundled_scenario("lebesgue-cube-d2-k2");
  j["generator"]["count"] = 64;
  j["curvature_refinement"]["counts"] = {64, 256};
  j["rwt"]["trials"] = 20;
  return parse_config(j);
}

}  // namespace

TEST_CASE("make_check relations") {
  const auto le = make_check("a", "<=", 1.0, 2.0);
  CHECK(le.passed);
  CHECK(le.margin == 1.0);
  CHECK(le.ratio == 0.5);
  CHECK(make_check("b", "<=", 2.0, 2.0).passed);
  CHECK(!make_check("c", "<", 2.0, 2.0).passed);
  const auto ge = make_check("d", ">=", 3.0, 2.0);
  CHECK(ge.passed);
  CHECK(ge.margin == 1.0);
  CHECK(!make_check("e", ">=", 1.0, 2.0).passed);
  CHECK(!make_check("f", "<=", std::nan(""), 1.0).passed);
  CHECK_THROWS(make_check("g", "==", 1.0, 1.0));
}

TEST_CASE("report ok() honours expected failures") {
  ScenarioReport r;
  r.checks.push_back(make_check("a", "<=", 1.0, 2.0));
  CHECK(r.ok());
  auto bad = make_check("b", "<=", 3.0, 2.0);
  r.checks.push_back(bad);
  CHECK(!r.ok());
  r.checks.back().expected_fail = true;
  CHECK(r.ok());
  r.checks.front().expected_fail = true;
  CHECK(!r.ok());
}

TEST_CASE("JSON round trip preserves every field, including infinities") {
  ScenarioReport r;
  r.config = Json{{"name", "x"}, {"k", 2}};
  r.measured["finite"] = 0.1;
  r.measured["big"] = std::numeric_limits<double>::infinity();
  r.checks.push_back(make_check("a", "<=", 1.0 / 3.0, std::numeric_limits<double>::infinity(), "note"));
  r.checks.push_back(make_check("b", ">=", -std::numeric_limits<double>::infinity(), 1.0));
  r.timings = std::map<std::string, double>{{"mainst", 0.5}};
  const Json j = report_to_json(r);
  CHECK(j.at("measured").at("big") == "inf");
  CHECK(j.at("ok") == false);
  const auto back = report_from_json(Json::parse(j.dump()));
  CHECK(back.checks.size() == 2);
  CHECK(back.checks[0].lhs == r.checks[0].lhs);
  CHECK(std::isinf(back.checks[0].rhs));
  CHECK(std::isinf(back.checks[1].lhs));
  CHECK(back.checks[1].lhs < 0);
  CHECK(back.config == r.config);
  CHECK(back.timings == r.timings);
  CHECK(back.measured == r.measured);
}

TEST_CASE("CSV has a header and one row per check") {
  ScenarioReport r;
  CHECK(report_to_csv(r) == "name,relation,lhs,rhs,margin,ratio,passed,expected_fail,note\n");
  r.checks.push_back(make_check("a", "<=", 0.1, 1.0, "with, comma"));
  r.checks.push_back(make_check("b", "<", 0.2, 1.0));
  const auto csv = report_to_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("0.10000000000000001") != std::string::npos);
  CHECK(csv.find("\"with, comma\"") != std::string::npos);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config(Json::array()), ConfigError);
  auto j = bundled_scenario("lebesgue-cube-d2-k2");
  auto bad = j;
  bad["colour"] = "red";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["eps_grid"] = {0.4, 0.2};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["eps_grid"] = {0.0, 0.2};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["gamma"] = 2.0;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["checks"] = {"mainst", "nonsense"};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["maximal"] = {{"family", {{"mode", "scale_floored_search"}}}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["budgets"] = {{"refine", 3}, {"oops", 1}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["k"] = "two";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_THROWS_AS(load_config("no-such-scenario"), ConfigError);
  CHECK_THROWS_AS(bundled_scenario("no-such-scenario"), ConfigError);
  CHECK(bundled_scenario_names().size() == 3);
  for (const auto& name : bundled_scenario_names()) CHECK_NOTHROW(load_config(name));
}

TEST_CASE("measure sources apply transform, slice and normalisation") {
  auto j = Json::parse(R"({"generator": {"family": "sphere_uniform", "dim": 3, "count": 400, "seed": 2},
                           "slice": {"axis": 2, "max_abs": 0.5},
                           "transform": [[2, 0, 0], [0, 2, 0], [0, 0, 2]],
                           "checks": ["mainst"]})");
  const auto c = parse_config(j);
  const auto mu = c.source.build();
  CHECK(mu.mass() == doctest::Approx(1.0));
  CHECK(mu.size() < 400);
  CHECK(mu.points().row(2).cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  CHECK(mu.point(0).norm() == doctest::Approx(2.0));
  CHECK(c.source.with_count(100).build().size() < 100);
}

TEST_CASE("two-atom measure: the sublevel mass is known in closed form") {
  MatrixX<double> p(2, 2);
  p << 1.0, 0.0,
       0.0, 1.0;
  const auto mu = PointMeasure::uniform(p);
  FamilyOptions fo;
  fo.random_frames = 4;
  fo.pca_frames = 1;
  const auto fam = make_family(mu, fo);
  const auto s = verify_mainst(mu, 2, {0.25, 0.5, 1.0}, fam, {4, 20}, 1.0, 1000);
  for (double eps : {0.25, 0.5, 1.0}) {
    char key[64];
    std::snprintf(key, sizeof key, "eps=%g", eps);
    const double delta_hat = s.measured.at(std::string("mainst.delta_hat.") + key);
    // Only the pairs (a, b) and (b, a) are non-degenerate; det(0, a, b) = 1.
    const double expected = 0.25 * delta_hat > 1.0 ? 0.5 : 0.0;
    CHECK(s.measured.at(std::string("mainst.I.") + key) == expected);
  }
  for (const auto& check : s.checks) CHECK_MESSAGE(check.passed, check.name);
}

TEST_CASE("maincor is covariant under dyadic dilation") {
  GeneratorSpec spec;
  spec.count = 49;
  const auto mu = generate(spec);
  FamilyOptions fo;
  fo.random_frames = 4;
  fo.pca_frames = 2;
  const auto a = verify_maincor({mu, dilate(mu, 2.0)}, {0.2, 0.4}, fo, {4, 0}, 1'000'000);
  const auto b = verify_maincor({dilate(mu, 2.0), dilate(mu, 4.0)}, {0.2, 0.4}, fo, {4, 0}, 1'000'000);
  for (const auto& [key, value] : a.measured) {
    if (key.rfind("maincor.delta", 0) == 0) {
      CHECK(b.measured.at(key) == doctest::Approx(4.0 * value));
    } else {
      CHECK(b.measured.at(key) == doctest::Approx(value));
    }
  }
  for (const auto& check : a.checks) CHECK(check.passed);
}

TEST_CASE("scenario runs are reproducible and thread independent") {
  const auto config = small_cube();
  set_thread_count(1);
  const auto one = run_scenario(config);
  set_thread_count(4);
  const auto four = run_scenario(config);
  set_thread_count(0);
  CHECK(report_to_json(one).dump() == report_to_json(four).dump());
  CHECK(one.ok());
  CHECK(!one.timings);
  for (const auto& c : one.checks) CHECK_MESSAGE(c.passed, c.name);
}

TEST_CASE("the flat scenario fails exactly where expected") {
  const auto report = run_scenario(load_config("flat-subspace-negative"));
  CHECK(report.ok());
  bool saw_expected = false;
  for (const auto& c : report.checks) {
    if (c.expected_fail) {
      saw_expected = true;
      CHECK(!c.passed);
    } else {
      CHECK(c.passed);
    }
  }
  CHECK(saw_expected);
}

TEST_CASE("emit_report writes files") {
  ScenarioReport r;
  r.checks.push_back(make_check("a", "<=", 1.0, 2.0));
  const auto path = (std::filesystem::temp_directory_path() / "detcurve_report_test.json").string();
  emit_report(r, "json", path);
  std::ifstream in(path);
  CHECK(report_from_json(Json::parse(in)) == r);
  std::filesystem::remove(path);
  CHECK_THROWS(emit_report(r, "xml", path));
}
