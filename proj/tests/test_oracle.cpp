#include <catch2/catch_amalgamated.hpp>

#include "hocs/analytic.hpp"
#include "hocs/engine.hpp"
#include "hocs/oracle.hpp"

using namespace hocs;

static OpticalLayout tiny_layout(int pixels = 2) {
  OpticalLayout l;
  l.wavelength = 532e-9;
  l.aperture = 2e-3;
  l.pixel_count = pixels;
  l.arm_count = 3;
  l.distances = {0.10, 0.20, 0.20};
  return l;
}

static Target fixed_target(std::string name, std::vector<int> arms,
                           std::vector<double> positions) {
  Target t;
  t.name = std::move(name);
  for (std::size_t i = 0; i < arms.size(); ++i)
    t.channels.push_back(ChannelSpec::intensity(arms[i], positions[i]));
  return t;
}

TEST_CASE("alphabet: roots of unity cancel every moment below L") {
  DiscreteAlphabet a{8};
  REQUIRE(std::abs(alphabet_moment_check(a, 8) - cplx{1.0, 0.0}) < 1e-14);
  for (int m = 1; m < 8; ++m) REQUIRE(std::abs(alphabet_moment_check(a, m)) < 1e-14);
  REQUIRE(std::abs(alphabet_moment_check(a, -3)) < 1e-14);
}

TEST_CASE("alphabet size guard: L >= 2N + 2") {
  DiscreteAlphabet a{8};
  REQUIRE_NOTHROW(a.validate(3));
  REQUIRE_THROWS_AS(a.validate(4), std::invalid_argument);
  DiscreteAlphabet b{7};
  REQUIRE_THROWS_AS(b.validate(3), std::invalid_argument);
}

TEST_CASE("oracle equals the pairing enumeration on every mode") {
  OpticalLayout l = tiny_layout();
  DiscreteAlphabet alphabet{8};

  struct Case {
    MaskMode mode;
    std::vector<int> arms;
    std::vector<double> positions;
  };
  std::vector<Case> cases = {
      {MaskMode::ghz_sum(0), {0, 1, 2}, {0.0, 0.0, 0.0}},
      {MaskMode::ghz_sum(0), {0, 1, 2}, {0.0, 10e-6, -25e-6}},
      {MaskMode::ghz_sum(0), {1, 2}, {0.0, 30e-6}},
      {MaskMode::identical(), {1, 2}, {0.0, 0.0}},
      {MaskMode::identical(), {1, 2}, {0.0, 40e-6}},
      {MaskMode::identical(), {0, 1, 2}, {0.0, 0.0, 0.0}},
      {MaskMode::independent(), {0, 1}, {0.0, 0.0}},
      {MaskMode::independent(), {0, 1, 2}, {0.0, 0.0, 0.0}},
      {MaskMode::custom_linear({1, 2, 3}), {0, 1}, {0.0, 15e-6}},
  };
  for (const auto& cs : cases) {
    CorrelationPlan plan;
    plan.pixel_count = l.pixel_count;
    plan.chunk_size = 64;
    plan.targets = {fixed_target("t", cs.arms, cs.positions)};
    auto exact = exact_correlation(cs.mode, l, alphabet, plan);
    double pm = pairing_moment(cs.mode, l, cs.arms, cs.positions);
    INFO("arms " << cs.arms.size() << " mode kind " << static_cast<int>(cs.mode.kind));
    REQUIRE(exact.targets[0].g[0] == Catch::Approx(pm).margin(1e-12));
  }
}

TEST_CASE("independent arms are exactly uncorrelated") {
  OpticalLayout l = tiny_layout();
  DiscreteAlphabet alphabet{8};
  CorrelationPlan plan;
  plan.pixel_count = l.pixel_count;
  plan.chunk_size = 64;
  plan.targets = {fixed_target("pair", {0, 2}, {5e-6, -5e-6})};
  auto exact = exact_correlation(MaskMode::independent(), l, alphabet, plan);
  REQUIRE(exact.targets[0].g[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("oracle handles scan targets per point") {
  OpticalLayout l = tiny_layout();
  DiscreteAlphabet alphabet{8};
  CorrelationPlan plan;
  plan.pixel_count = l.pixel_count;
  plan.chunk_size = 64;
  const std::vector<double> axis = {-30e-6, 0.0, 30e-6};
  Target t;
  t.name = "g2_scan";
  t.axis = axis;
  t.channels = {ChannelSpec::intensity(1, 0.0), ChannelSpec::intensity_scan(2, axis)};
  plan.targets = {std::move(t)};
  auto exact = exact_correlation(MaskMode::identical(), l, alphabet, plan);
  REQUIRE(exact.targets[0].g.size() == 3);
  for (std::size_t q = 0; q < 3; ++q) {
    double pm = pairing_moment(MaskMode::identical(), l, {1, 2}, {0.0, axis[q]});
    REQUIRE(exact.targets[0].g[q] == Catch::Approx(pm).margin(1e-12));
  }
}

TEST_CASE("oracle rejects oversized instances") {
  OpticalLayout l = tiny_layout(8);  // 8^(2*8) assignments: far over any limit
  DiscreteAlphabet alphabet{8};
  CorrelationPlan plan;
  plan.pixel_count = l.pixel_count;
  plan.chunk_size = 64;
  plan.targets = {fixed_target("t", {0, 1, 2}, {0.0, 0.0, 0.0})};
  REQUIRE_THROWS_AS(exact_correlation(MaskMode::ghz_sum(0), l, alphabet, plan),
                    std::invalid_argument);
}

TEST_CASE("Monte Carlo over the oracle's alphabet agrees within 3 standard errors") {
  OpticalLayout l = tiny_layout();
  DiscreteAlphabet alphabet{8};
  CorrelationPlan plan;
  plan.pixel_count = l.pixel_count;
  plan.chunk_size = 256;
  plan.targets = {fixed_target("pair", {1, 2}, {0.0, 0.0}),
                  fixed_target("triple", {0, 1, 2}, {0.0, 0.0, 0.0})};
  auto exact = exact_correlation(MaskMode::identical(), l, alphabet, plan);

  EnsembleSpec spec{l, MaskMode::identical(), RngPolicy{55}, 20000, alphabet.size};
  auto est = normalized_g(run_ensemble(spec, plan, 2), plan);
  for (std::size_t ti = 0; ti < plan.targets.size(); ++ti) {
    double dev = std::abs(est.targets[ti].g[0] - exact.targets[ti].g[0]);
    REQUIRE(dev <= 3.0 * est.targets[ti].stderr_g[0] + 1e-9);
  }
}
