#include <catch2/catch_amalgamated.hpp>

#include "hocs/analytic.hpp"

using namespace hocs;

static OpticalLayout paper_layout(int pixels = 64) {
  OpticalLayout l;
  l.wavelength = 532e-9;
  l.aperture = 2e-3;
  l.pixel_count = pixels;
  l.arm_count = 3;
  l.distances = {0.10, 0.20, 0.20};
  return l;
}

TEST_CASE("sinc squared basics") {
  REQUIRE(sinc_squared(0.0) == 1.0);
  REQUIRE(sinc_squared(std::numbers::pi) == Catch::Approx(0.0).margin(1e-25));
  // Series/direct agreement near the switchover.
  double u = 1.0001e-4;
  double direct = std::pow(std::sin(u) / u, 2.0);
  REQUIRE(sinc_squared(0.9999e-4) == Catch::Approx(direct).epsilon(1e-10));
}

TEST_CASE("GHZ prediction peaks at 2 and dies at one correlation width") {
  OpticalLayout l = paper_layout();
  REQUIRE(predicted_g3_ghz(0.0, 0.0, 0.0, l) == Catch::Approx(2.0));
  double zero = l.correlation_width(2);  // 53.2 um
  REQUIRE(predicted_g3_ghz(0.0, 0.0, zero, l) == Catch::Approx(1.0).margin(1e-12));
  // A balanced displacement pattern keeps the peak: x1/d1 = x2/d2 + x3/d3.
  REQUIRE(predicted_g3_ghz(20e-6, 20e-6, 20e-6, l) == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("GHZ prediction requires the balance condition") {
  OpticalLayout l = paper_layout();
  l.distances = {0.10, 0.20, 0.21};
  REQUIRE_THROWS_AS(predicted_g3_ghz(0.0, 0.0, 0.0, l), std::domain_error);
  REQUIRE_NOTHROW(quadrature_g3_ghz(0.0, 0.0, 0.0, l));
}

TEST_CASE("GHZ prediction is symmetric under (x2,d2) <-> (x3,d3)") {
  OpticalLayout l = paper_layout();
  l.distances = {0.10, 0.25, 1.0 / 6.0};  // 1/0.25 + 6 = 10 exactly
  REQUIRE(check_balance_condition(l).satisfied);
  OpticalLayout swapped = l;
  std::swap(swapped.distances[1], swapped.distances[2]);
  for (double x2 : {-30e-6, 0.0, 10e-6})
    for (double x3 : {-15e-6, 25e-6})
      REQUIRE(predicted_g3_ghz(5e-6, x2, x3, l) ==
              Catch::Approx(predicted_g3_ghz(5e-6, x3, x2, swapped)).epsilon(1e-12));
}

TEST_CASE("quadrature converges to the continuum law: max gap <= 5/M") {
  OpticalLayout l = paper_layout(64);
  double max_gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    double x3 = -120e-6 + i * (240e-6 / 49.0);
    max_gap = std::max(max_gap,
                       std::abs(quadrature_g3_ghz(0.0, 0.0, x3, l) -
                                predicted_g3_ghz(0.0, 0.0, x3, l)));
  }
  REQUIRE(max_gap <= 5.0 / l.pixel_count);
}

TEST_CASE("quadrature peak is 2 - 1/M in interference units") {
  OpticalLayout l = paper_layout(16);
  REQUIRE(quadrature_g3_ghz(0.0, 0.0, 0.0, l) ==
          Catch::Approx(2.0 - 1.0 / 16.0).epsilon(1e-12));
}

TEST_CASE("W pair prediction: coincidence at equal distances gives 2") {
  OpticalLayout l = paper_layout(64);
  REQUIRE(predicted_g2_w(0.0, 0.0, 1, 2, l) == Catch::Approx(2.0).epsilon(1e-12));
  REQUIRE(predicted_g2_w(0.0, 0.0, 1, 2, l, true) ==
          Catch::Approx(2.0 - 1.0 / 64.0).epsilon(1e-12));
  // Separation by many widths kills the correlation.
  REQUIRE(predicted_g2_w(0.0, 300e-6, 1, 2, l) == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("W triple prediction: bounded by [1, 6], 6 only at full coincidence") {
  OpticalLayout l = paper_layout(64);
  l.distances = {0.20, 0.20, 0.20};
  REQUIRE(predicted_g3_w(0.0, 0.0, 0.0, l) == Catch::Approx(6.0).epsilon(1e-12));
  for (double x : {-80e-6, -20e-6, 10e-6, 60e-6}) {
    double g = predicted_g3_w(0.0, x, -x, l);
    REQUIRE(g >= 1.0 - 1e-9);
    REQUIRE(g <= 6.0 - 1e-6);
  }
}

TEST_CASE("pairing enumeration agrees with the closed forms") {
  OpticalLayout l = paper_layout(3);  // M=3 keeps the enumeration tiny

  SECTION("identical-mode pair: 1 + |mu|^2 - 1/M") {
    for (double x : {0.0, 25e-6, 60e-6}) {
      double expected = predicted_g2_w(0.0, x, 1, 2, l, true);
      double pm = pairing_moment(MaskMode::identical(), l, {1, 2}, {0.0, x});
      REQUIRE(pm == Catch::Approx(expected).epsilon(1e-12));
    }
  }

  SECTION("GhzSum raw triple: 1 + |mu|^2/M - 1/M^2") {
    const double M = l.pixel_count;
    for (double x : {0.0, 30e-6}) {
      double quad = quadrature_g3_ghz(0.0, 0.0, x, l);
      double expected = 1.0 + (quad - 1.0) / M;
      double pm = pairing_moment(MaskMode::ghz_sum(0), l, {0, 1, 2}, {0.0, 0.0, x});
      REQUIRE(pm == Catch::Approx(expected).epsilon(1e-12));
    }
  }

  SECTION("identical-mode triple coincidence: 6 - 9/M + 4/M^2") {
    OpticalLayout eq = l;
    eq.distances = {0.20, 0.20, 0.20};
    const double M = eq.pixel_count;
    double pm = pairing_moment(MaskMode::identical(), eq, {0, 1, 2}, {0.0, 0.0, 0.0});
    REQUIRE(pm == Catch::Approx(6.0 - 9.0 / M + 4.0 / (M * M)).epsilon(1e-12));
  }

  SECTION("GhzSum pairs are exactly flat") {
    for (double x : {0.0, 30e-6}) {
      REQUIRE(pairing_moment(MaskMode::ghz_sum(0), l, {0, 1}, {0.0, x}) ==
              Catch::Approx(1.0).epsilon(1e-12));
      REQUIRE(pairing_moment(MaskMode::ghz_sum(0), l, {1, 2}, {0.0, x}) ==
              Catch::Approx(1.0).epsilon(1e-12));
    }
  }

  SECTION("custom (1,1,1) reproduces identical-mode moments") {
    double a = pairing_moment(MaskMode::custom_linear({1, 1, 1}), l, {1, 2}, {0.0, 20e-6});
    double b = pairing_moment(MaskMode::identical(), l, {1, 2}, {0.0, 20e-6});
    REQUIRE(a == Catch::Approx(b).epsilon(1e-12));
  }

  SECTION("instance-size guard") {
    OpticalLayout big = paper_layout(64);
    REQUIRE_THROWS_AS(
        pairing_moment(MaskMode::identical(), big, {0, 1, 2}, {0.0, 0.0, 0.0}, 1e6),
        std::invalid_argument);
  }
}

TEST_CASE("structure classifier reproduces the GHZ/W dichotomy") {
  auto ghz3 = classify_structure(MaskMode::ghz_sum(0), 3);
  REQUIRE(ghz3.surviving_orders == std::set<int>{3});
  REQUIRE_FALSE(ghz3.order_survives(2));

  auto ghz4 = classify_structure(MaskMode::ghz_sum(0), 4);
  REQUIRE(ghz4.surviving_orders == std::set<int>{4});

  auto w3 = classify_structure(MaskMode::identical(), 3);
  REQUIRE(w3.surviving_orders == std::set<int>{2, 3});

  auto ind = classify_structure(MaskMode::independent(), 3);
  REQUIRE(ind.surviving_orders.empty());
}

TEST_CASE("ghz argument matches its definition") {
  OpticalLayout l = paper_layout();
  double u = ghz_argument({10e-6, 5e-6, 5e-6}, l);
  double expected = std::numbers::pi * l.aperture / l.wavelength *
                    (10e-6 / 0.10 - 5e-6 / 0.20 - 5e-6 / 0.20);
  REQUIRE(u == Catch::Approx(expected).epsilon(1e-12));
}
