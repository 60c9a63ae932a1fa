#include <catch2/catch_amalgamated.hpp>

#include "hocs/config.hpp"
#include "hocs/io.hpp"

using namespace hocs;

static const char* kMinimalGhz = R"({
  "layout": {"wavelength": "532 nm", "aperture": "2 mm",
             "distances": ["10 cm", "20 cm", "20 cm"]},
  "mode": "ghz",
  "samples": 20000,
  "seed": 1
})";

TEST_CASE("minimal GHZ config parses with defaults applied") {
  RunConfig cfg = parse_config(std::string(kMinimalGhz));
  REQUIRE(cfg.layout.wavelength == Catch::Approx(532e-9));
  REQUIRE(cfg.layout.aperture == Catch::Approx(2e-3));
  REQUIRE(cfg.layout.distances == std::vector<double>{0.10, 0.20, 0.20});
  REQUIRE(cfg.layout.arm_count == 3);
  REQUIRE(cfg.layout.pixel_count == 64);  // default
  REQUIRE(cfg.chunk_size == 256);         // default
  REQUIRE(cfg.samples == 20000);
  REQUIRE(cfg.seed == 1);
  REQUIRE(cfg.mode.kind == MaskMode::Kind::GhzSum);
  REQUIRE(cfg.grids.size() == 3);
  REQUIRE(cfg.grids[2].positions.size() == 121);  // default grid
}

TEST_CASE("unit suffixes are mandatory and checked") {
  std::string bad = kMinimalGhz;
  bad.replace(bad.find("\"532 nm\""), 8, "532");
  REQUIRE_THROWS_AS(parse_config(bad), ConfigError);
  try {
    parse_config(bad);
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("layout.wavelength") != std::string::npos);
  }

  std::string badunit = kMinimalGhz;
  badunit.replace(badunit.find("2 mm"), 4, "2 ft");
  REQUIRE_THROWS_AS(parse_config(badunit), ConfigError);
}

TEST_CASE("distance count mismatch names the distances key") {
  const char* doc = R"({
    "layout": {"wavelength": "532 nm", "aperture": "2 mm", "arm_count": 3,
               "distances": ["10 cm", "20 cm"]},
    "mode": "ghz", "samples": 10
  })";
  try {
    parse_config(std::string(doc));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("layout.distances") != std::string::npos);
  }
}

TEST_CASE("negative wavelength and bad modes are rejected") {
  std::string neg = kMinimalGhz;
  neg.replace(neg.find("532 nm"), 6, "-532 nm");
  REQUIRE_THROWS_AS(parse_config(neg), ConfigError);

  std::string badmode = kMinimalGhz;
  badmode.replace(badmode.find("\"ghz\""), 5, "\"bell\"");
  REQUIRE_THROWS_AS(parse_config(badmode), ConfigError);
}

TEST_CASE("custom targets referencing unknown arms fail with a key path") {
  const char* doc = R"({
    "layout": {"wavelength": "532 nm", "aperture": "2 mm",
               "distances": ["10 cm", "20 cm", "20 cm"]},
    "mode": "ghz", "samples": 10, "scenario": "custom",
    "targets": [{"name": "bad", "channels": [{"arm": 7, "position": "0 m"}]}]
  })";
  try {
    parse_config(std::string(doc));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("targets[0].channels[0].arm") != std::string::npos);
  }
}

TEST_CASE("ghost scenario requires an object inside arm 1's grid") {
  const char* noobj = R"({
    "layout": {"wavelength": "532 nm", "aperture": "2 mm",
               "distances": ["10 cm", "20 cm", "20 cm"]},
    "mode": "ghz", "samples": 10, "scenario": "ghost"
  })";
  REQUIRE_THROWS_AS(parse_config(std::string(noobj)), ConfigError);

  const char* farobj = R"({
    "layout": {"wavelength": "532 nm", "aperture": "2 mm",
               "distances": ["10 cm", "20 cm", "20 cm"]},
    "mode": "ghz", "samples": 10, "scenario": "ghost",
    "object": {"points": [{"position": "5 mm"}]}
  })";
  REQUIRE_THROWS_AS(parse_config(std::string(farobj)), ConfigError);
}

TEST_CASE("round trip: parse(serialize(cfg)) preserves the config") {
  const char* doc = R"({
    "layout": {"wavelength": "532 nm", "aperture": "2 mm", "pixel_count": 16,
               "distances": ["10 cm", "20 cm", "20 cm"]},
    "mode": {"kind": "custom_linear", "coefficients": [1, 2, 3]},
    "samples": 512, "seed": 42, "chunk_size": 32, "workers": 2,
    "alphabet_size": 8, "scenario": "custom", "output_dir": "artifacts",
    "targets": [
      {"name": "t0", "channels": [{"arm": 0, "position": "0 m"},
                                  {"arm": 2, "scan": true}]}
    ],
    "object": {"points": [{"position": "-10 um", "transmission": 0.5}],
               "mode": "diagonal", "estimator": "direct", "threshold_fraction": 0.4}
  })";
  RunConfig cfg = parse_config(std::string(doc));
  json ser = serialize_config(cfg);
  RunConfig back = parse_config(ser);
  REQUIRE(serialize_config(back) == ser);
  REQUIRE(config_fingerprint(back) == config_fingerprint(cfg));
  REQUIRE(back.mode.coefficients == cfg.mode.coefficients);
  REQUIRE(back.plan.targets.size() == 1);
  REQUIRE(back.object->points[0].transmission == 0.5);
  REQUIRE(back.ghost.mode == GhostMode::DiagonalX2EqX3);
}

TEST_CASE("fingerprint ignores workers and output directory") {
  RunConfig a = parse_config(std::string(kMinimalGhz));
  RunConfig b = a;
  b.workers = 8;
  b.output_dir = "elsewhere";
  REQUIRE(config_fingerprint(a) == config_fingerprint(b));
  RunConfig c = a;
  c.seed = 2;
  REQUIRE(config_fingerprint(a) != config_fingerprint(c));
}

TEST_CASE("CSV rendering is canonical and exact") {
  std::vector<double> x = {0.1, -5.32e-05, 2.0};
  std::vector<double> g = {1.0, 1.9604, 1.0 / 3.0};
  std::string csv = render_csv({{"x_m", &x}, {"g", &g}});
  REQUIRE(csv == "x_m,g\n0.1,1\n-5.32e-05,1.9604\n2,0.333333333333333"
                 "3\n");
  // Values round-trip exactly through the formatter.
  REQUIRE(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  REQUIRE(format_double(0.1) == "0.1");

  std::vector<double> ragged = {1.0};
  REQUIRE_THROWS_AS(render_csv({{"a", &x}, {"b", &ragged}}), IoError);
}
