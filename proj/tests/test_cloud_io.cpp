#include <filesystem>
#include <sstream>

#include "detcurve/cloud_io.hpp"
#include "doctest.h"

using namespace detcurve;

TEST_CASE("csv round trip is exact") {
  GeneratorSpec spec;
  spec.family = GeneratorFamily::sphere_uniform;
  spec.dim = 3;
  spec.count = 40;
  const auto mu = generate(spec);
  std::stringstream buf;
  write_cloud_csv(buf, mu);
  CHECK(read_cloud_csv(buf) == mu);
}

TEST_CASE("json round trip is exact") {
  MatrixX<double> p(2, 3);
  p << 0.1, 1e-300, -3.5,
       2.0, 0.0, 1.0 / 3.0;
  const PointMeasure mu(p, (VectorX<double>(3) << 0.2, 0.0, 0.8).finished());
  std::stringstream buf;
  write_cloud_json(buf, mu);
  CHECK(read_cloud_json(buf) == mu);
}

TEST_CASE("missing weights mean equal weights") {
  std::stringstream csv("x1,x2\n0,0\n1,0\n0,1\n1,1\n");
  const auto mu = read_cloud_csv(csv);
  CHECK(mu.size() == 4);
  CHECK(mu.weight(2) == doctest::Approx(0.25));

  std::stringstream json(R"([{"x1": 0, "x2": 1}, {"x1": 2, "x2": 3}])");
  const auto nu = read_cloud_json(json);
  CHECK(nu.point(1)(1) == 3.0);
  CHECK(nu.weight(0) == doctest::Approx(0.5));
}

TEST_CASE("malformed files are rejected") {
  std::stringstream bad_header("a,b\n1,2\n");
  CHECK_THROWS(read_cloud_csv(bad_header));
  std::stringstream short_row("x1,x2\n1\n");
  CHECK_THROWS(read_cloud_csv(short_row));
  std::stringstream not_number("x1\nabc\n");
  CHECK_THROWS(read_cloud_csv(not_number));
  std::stringstream empty("x1,x2\n");
  CHECK_THROWS(read_cloud_csv(empty));
  std::stringstream bad_json("{\"x1\": 1}");
  CHECK_THROWS(read_cloud_json(bad_json));
}

TEST_CASE("files are dispatched by extension") {
  CHECK(cloud_format_for("a/b.json") == CloudFormat::json);
  CHECK(cloud_format_for("a/b.csv") == CloudFormat::csv);
  GeneratorSpec spec;
  spec.count = 9;
  const auto mu = generate(spec);
  const auto dir = std::filesystem::temp_directory_path();
  for (const char* name : {"detcurve_io_test.csv", "detcurve_io_test.json"}) {
    const auto path = (dir / name).string();
    save_cloud(path, mu);
    CHECK(load_cloud(path) == mu);
    std::filesystem::remove(path);
  }
  CHECK_THROWS(load_cloud((dir / "does-not-exist.csv").string()));
}
