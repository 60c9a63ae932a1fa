#include <catch2/catch_amalgamated.hpp>

#include "hocs/experiments.hpp"

using namespace hocs;

static OpticalLayout paper_layout(int pixels = 16) {
  OpticalLayout l;
  l.wavelength = 532e-9;
  l.aperture = 2e-3;
  l.pixel_count = pixels;
  l.arm_count = 3;
  l.distances = {0.10, 0.20, 0.20};
  return l;
}

TEST_CASE("peak location: strict local maxima with sub-grid refinement") {
  std::vector<double> axis, profile;
  // Exact parabola peaked off-grid at x = 2.30 with height 1.
  for (int i = 0; i <= 50; ++i) {
    double x = i * 0.1;
    axis.push_back(x);
    profile.push_back(std::max(0.0, 1.0 - (x - 2.30) * (x - 2.30)));
  }
  auto peaks = locate_peaks(profile, axis, 0.5);
  REQUIRE(peaks.size() == 1);
  REQUIRE(peaks[0].position == Catch::Approx(2.30).margin(1e-9));

  SECTION("flat profiles yield no peaks") {
    std::vector<double> flat(axis.size(), 1.0);
    REQUIRE(locate_peaks(flat, axis).empty());
    std::vector<double> zeros(axis.size(), 0.0);
    REQUIRE(locate_peaks(zeros, axis).empty());
  }
  SECTION("threshold suppresses minor bumps") {
    std::vector<double> two = profile;
    two[5] = 0.2;  // small secondary bump (neighbors are 0)
    auto p = locate_peaks(two, axis, 0.5);
    REQUIRE(p.size() == 1);
    auto p2 = locate_peaks(two, axis, 0.1);
    REQUIRE(p2.size() == 2);
    REQUIRE(p2[0].position < p2[1].position);  // sorted
  }
  SECTION("argument validation") {
    REQUIRE_THROWS_AS(locate_peaks(profile, axis, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(locate_peaks(profile, axis, 1.0), std::invalid_argument);
    std::vector<double> shorter(axis.size() - 1, 0.0);
    REQUIRE_THROWS_AS(locate_peaks(shorter, axis), std::invalid_argument);
  }
}

TEST_CASE("object validation") {
  OpticalLayout l = paper_layout();
  auto grids = default_detector_grids(l);
  ObjectSpec obj;
  REQUIRE_THROWS_AS(obj.validate(grids[0]), std::invalid_argument);  // empty
  obj.points = {{-120e-6, 1.0}};
  REQUIRE_NOTHROW(obj.validate(grids[0]));
  obj.points.push_back({5e-3, 1.0});  // outside arm 1's grid
  REQUIRE_THROWS_AS(obj.validate(grids[0]), std::invalid_argument);
  obj.points = {{0.0, 1.5}};  // transmission > 1
  REQUIRE_THROWS_AS(obj.validate(grids[0]), std::invalid_argument);
}

TEST_CASE("scenario preconditions") {
  OpticalLayout off = paper_layout();
  off.distances = {0.10, 0.20, 0.21};
  REQUIRE_THROWS_AS(run_ghz_scenario(off, 16, 1), std::invalid_argument);

  OpticalLayout unequal = paper_layout();
  unequal.distances = {0.10, 0.20, 0.25};
  REQUIRE_THROWS_AS(run_w_scenario(unequal, 16, 1), std::invalid_argument);

  REQUIRE_THROWS_AS(ghz_interference_target("t", MaskMode::identical(), 3, 1,
                                            {0.0, 0.0, 0.0}, 2, {0.0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ghz_interference_target("t", MaskMode::ghz_sum(0), 3, 0,
                                            {0.0, 0.0, 0.0}, 2, {0.0}),
                    std::invalid_argument);
}

TEST_CASE("small GHZ run: peak near 2, pairs near flat") {
  // Statistical smoke test at reduced scale; the full-tolerance version is
  // the acceptance suite's criterion 1-2.
  GhzReport rep = run_ghz_scenario(paper_layout(16), 4000, 123, 2);
  REQUIRE(rep.samples == 4000);
  std::size_t mid = rep.axis.size() / 2;
  REQUIRE(rep.axis[mid] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(rep.g3[mid] > 1.6);
  REQUIRE(rep.g3[mid] < 2.3);
  REQUIRE(rep.pair_flatness.size() == 3);
  for (const auto& f : rep.pair_flatness) REQUIRE(f.max_deviation < 0.15);
  REQUIRE(rep.predicted[mid] == Catch::Approx(2.0));
}

TEST_CASE("small W run: coincidence values and surviving orders") {
  OpticalLayout l = paper_layout(32);
  l.distances = {0.20, 0.20, 0.20};
  WReport rep = run_w_scenario(l, 4000, 321, 2);
  REQUIRE(rep.surviving_orders == std::set<int>{2, 3});
  REQUIRE(rep.g2_coincidence > 1.7);
  REQUIRE(rep.g2_coincidence < 2.3);
  REQUIRE(rep.g3_coincidence_valid);
  REQUIRE(rep.g3_coincidence > 4.5);
  REQUIRE(rep.g3_coincidence < 7.5);
}

TEST_CASE("ghost imaging second-order control is flat") {
  OpticalLayout l = paper_layout(16);
  ObjectSpec obj;
  obj.points = {{-30e-6, 1.0}, {20e-6, 1.0}};
  auto res = run_ghost_imaging(l, obj, GhostMode::SecondOrderControl, 4000, 77, 2);
  for (double v : res.profile) REQUIRE(std::abs(v - 1.0) < 0.2);
  REQUIRE(res.contrast < 0.2);
}

TEST_CASE("ghost imaging recovers a single point at 2x magnification") {
  OpticalLayout l = paper_layout(16);
  ObjectSpec obj;
  obj.points = {{-60e-6, 1.0}};
  auto res = run_ghost_imaging(l, obj, GhostMode::FixedX2ScanX3, 6000, 99, 2);
  REQUIRE(res.peaks.size() == 1);
  double width = l.correlation_width(2);
  REQUIRE(std::abs(res.peaks[0].position - (-120e-6)) < width);
  REQUIRE(res.magnification == Catch::Approx(2.0).margin(0.2));
  REQUIRE(res.contrast > 0.1);
}
