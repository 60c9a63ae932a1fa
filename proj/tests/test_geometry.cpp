#include <catch2/catch_amalgamated.hpp>

#include "hocs/geometry.hpp"

using namespace hocs;

static OpticalLayout paper_layout() {
  OpticalLayout l;
  l.wavelength = 532e-9;
  l.aperture = 2e-3;
  l.pixel_count = 64;
  l.arm_count = 3;
  l.distances = {0.10, 0.20, 0.20};
  return l;
}

TEST_CASE("balance condition holds for the 10/20/20 cm layout") {
  auto rep = check_balance_condition(paper_layout());
  REQUIRE(rep.satisfied);
  REQUIRE(std::abs(rep.residual) < 1e-12);
}

TEST_CASE("balance condition reports the residual for 10/20/21 cm") {
  OpticalLayout l = paper_layout();
  l.distances = {0.10, 0.20, 0.21};
  auto rep = check_balance_condition(l);
  REQUIRE_FALSE(rep.satisfied);
  // 1/0.10 - (1/0.20 + 1/0.21) = 0.2381.. m^-1
  REQUIRE(rep.residual == Catch::Approx(10.0 - 5.0 - 1.0 / 0.21).epsilon(1e-12));
  REQUIRE(rep.residual > 0.238);
  REQUIRE(rep.residual < 0.239);
}

TEST_CASE("four-arm balance: 10/30/30/30 cm is exact") {
  OpticalLayout l;
  l.wavelength = 532e-9;
  l.aperture = 2e-3;
  l.pixel_count = 64;
  l.arm_count = 4;
  l.distances = {0.10, 0.30, 0.30, 0.30};
  REQUIRE(check_balance_condition(l).satisfied);
}

TEST_CASE("correlation width is lambda*d/D") {
  OpticalLayout l = paper_layout();
  REQUIRE(l.correlation_width(2) == Catch::Approx(53.2e-6).epsilon(1e-12));
  REQUIRE(l.correlation_width(0) == Catch::Approx(26.6e-6).epsilon(1e-12));
}

TEST_CASE("layout validation rejects bad parameters") {
  OpticalLayout l = paper_layout();
  l.wavelength = -1.0;
  REQUIRE_THROWS_AS(l.validate(), std::invalid_argument);
  l = paper_layout();
  l.distances = {0.10, 0.20};  // mismatch with arm_count = 3
  REQUIRE_THROWS_AS(l.validate(), std::invalid_argument);
  l = paper_layout();
  l.pixel_count = 0;
  REQUIRE_THROWS_AS(l.validate(), std::invalid_argument);
  l = paper_layout();
  l.distances[1] = 0.0;
  REQUIRE_THROWS_AS(l.validate(), std::invalid_argument);
}

TEST_CASE("source grid is symmetric with pitch D/M") {
  OpticalLayout l = paper_layout();
  l.pixel_count = 4;
  SourceGrid g = build_source_grid(l);
  REQUIRE(g.positions.size() == 4);
  REQUIRE(g.pitch == Catch::Approx(0.5e-3));
  REQUIRE(g.positions[0] == Catch::Approx(-0.75e-3));
  REQUIRE(g.positions[3] == Catch::Approx(0.75e-3));
  double sum = 0.0;
  for (double x : g.positions) sum += x;
  REQUIRE(std::abs(sum) < 1e-18);
}

TEST_CASE("detector grid has an odd centered point count") {
  DetectorGrid g = DetectorGrid::make(2, 0.0, 100e-6, 10e-6);
  REQUIRE(g.positions.size() % 2 == 1);
  std::size_t mid = g.positions.size() / 2;
  REQUIRE(g.positions[mid] == Catch::Approx(0.0).margin(1e-18));
  REQUIRE(g.positions.front() == Catch::Approx(-g.positions.back()).margin(1e-15));
  REQUIRE_THROWS_AS(DetectorGrid::make(0, 0.0, 1e-3, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(DetectorGrid::make(0, 0.0, -1e-3, 1e-6), std::invalid_argument);
}

TEST_CASE("default detector grids span +-6 correlation widths") {
  OpticalLayout l = paper_layout();
  auto grids = default_detector_grids(l);
  REQUIRE(grids.size() == 3);
  double w = l.correlation_width(2);
  REQUIRE(grids[2].positions.back() == Catch::Approx(6.0 * w).epsilon(1e-9));
  REQUIRE(grids[2].step == Catch::Approx(w / 10.0).epsilon(1e-12));
  REQUIRE(grids[2].positions.size() == 121);
}

TEST_CASE("balance residual scales with geometry (scale invariance)") {
  OpticalLayout l = paper_layout();
  OpticalLayout s = l;
  for (double& d : s.distances) d *= 3.0;
  REQUIRE(check_balance_condition(s).satisfied);
  REQUIRE(s.correlation_width(2) == Catch::Approx(3.0 * l.correlation_width(2)));
}
