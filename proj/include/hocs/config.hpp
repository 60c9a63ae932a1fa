#pragma once

// Run configuration: a JSON document with explicit unit suffixes on every
// length. Parsing applies defaults (M=64, chunk_size=256, detector grids from
// default_detector_grids) and reports every failure with the offending key
// path.

#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hocs/correlator.hpp"
#include "hocs/experiments.hpp"
#include "hocs/geometry.hpp"
#include "hocs/masks.hpp"

namespace hocs {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Scenario { Ghz, W, NOrder, Ghost, Custom };

struct GhostOptions {
  GhostMode mode = GhostMode::FixedX2ScanX3;
  GhostEstimator estimator = GhostEstimator::ConditionalCovariance;
  double threshold_fraction = 0.5;
};

struct RunConfig {
  OpticalLayout layout;
  MaskMode mode = MaskMode::ghz_sum(0);
  std::int64_t samples = 20000;
  std::uint64_t seed = 1;
  int chunk_size = 256;
  int workers = 1;
  int alphabet_size = 0;  // 0 = continuous phases
  Scenario scenario = Scenario::Ghz;
  std::vector<DetectorGrid> grids;
  CorrelationPlan plan;  // populated for Scenario::Custom; scenarios build their own
  std::optional<ObjectSpec> object;
  GhostOptions ghost;
  std::string output_dir = "out";
};

namespace detail {

[[noreturn]] inline void cfg_fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config error at '" + path + "': " + msg);
}

inline const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.is_object() || !j.contains(key)) cfg_fail(path + "." + key, "missing required key");
  return j.at(key);
}

// Lengths are strings with an explicit unit suffix: "532 nm", "2mm", "0.1 m".
inline double parse_length(const json& j, const std::string& path) {
  if (!j.is_string()) cfg_fail(path, "lengths must be strings with a unit suffix (nm/um/mm/cm/m)");
  std::string s = j.get<std::string>();
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    cfg_fail(path, "cannot parse number in '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  std::string unit = s.substr(pos);
  double scale = 0.0;
  if (unit == "nm") scale = 1e-9;
  else if (unit == "um") scale = 1e-6;
  else if (unit == "mm") scale = 1e-3;
  else if (unit == "cm") scale = 1e-2;
  else if (unit == "m") scale = 1.0;
  else cfg_fail(path, "unit-less or unknown unit '" + unit + "' (use nm/um/mm/cm/m)");
  return value * scale;
}

inline std::int64_t parse_int(const json& j, const std::string& path, std::int64_t lo) {
  if (!j.is_number_integer()) cfg_fail(path, "must be an integer");
  std::int64_t v = j.get<std::int64_t>();
  if (v < lo) cfg_fail(path, "must be >= " + std::to_string(lo));
  return v;
}

inline MaskMode parse_mode(const json& j, const std::string& path, int arm_count) {
  MaskMode m;
  std::string kind;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else if (j.is_object()) {
    kind = require(j, path, "kind").get<std::string>();
  } else {
    cfg_fail(path, "must be a string or object");
  }
  if (kind == "ghz") {
    int c = 0;
    if (j.is_object() && j.contains("constrained_arm"))
      c = static_cast<int>(parse_int(j.at("constrained_arm"), path + ".constrained_arm", 0));
    m = MaskMode::ghz_sum(c);
  } else if (kind == "identical") {
    m = MaskMode::identical();
  } else if (kind == "independent") {
    m = MaskMode::independent();
  } else if (kind == "custom_linear") {
    if (!j.is_object() || !j.contains("coefficients"))
      cfg_fail(path + ".coefficients", "missing required key");
    std::vector<int> c;
    for (const auto& e : j.at("coefficients")) {
      if (!e.is_number_integer()) cfg_fail(path + ".coefficients", "entries must be integers");
      c.push_back(e.get<int>());
    }
    m = MaskMode::custom_linear(std::move(c));
  } else {
    cfg_fail(path, "invalid mode '" + kind + "' (ghz/identical/independent/custom_linear)");
  }
  try {
    m.validate(arm_count);
  } catch (const std::exception& e) {
    cfg_fail(path, e.what());
  }
  return m;
}

inline Scenario parse_scenario(const std::string& s, const std::string& path) {
  if (s == "ghz") return Scenario::Ghz;
  if (s == "w") return Scenario::W;
  if (s == "norder") return Scenario::NOrder;
  if (s == "ghost") return Scenario::Ghost;
  if (s == "custom") return Scenario::Custom;
  cfg_fail(path, "invalid scenario '" + s + "' (ghz/w/norder/ghost/custom)");
}

inline CorrelationPlan parse_targets(const json& jt, const std::string& path,
                                     const RunConfig& cfg) {
  CorrelationPlan plan;
  plan.pixel_count = cfg.layout.pixel_count;
  plan.chunk_size = cfg.chunk_size;
  if (!jt.is_array() || jt.empty()) cfg_fail(path, "must be a non-empty array");
  int ti = 0;
  for (const auto& jtarget : jt) {
    std::string tpath = path + "[" + std::to_string(ti++) + "]";
    Target t;
    t.name = require(jtarget, tpath, "name").get<std::string>();
    const json& jc = require(jtarget, tpath, "channels");
    if (!jc.is_array() || jc.empty()) cfg_fail(tpath + ".channels", "must be a non-empty array");
    int ci = 0;
    for (const auto& jchan : jc) {
      std::string cpath = tpath + ".channels[" + std::to_string(ci++) + "]";
      int arm = static_cast<int>(parse_int(require(jchan, cpath, "arm"), cpath + ".arm", 0));
      if (arm >= cfg.layout.arm_count)
        cfg_fail(cpath + ".arm", "references unknown arm " + std::to_string(arm));
      bool scan = jchan.contains("scan") && jchan.at("scan").is_boolean() &&
                  jchan.at("scan").get<bool>();
      if (scan) {
        const auto& axis = cfg.grids.at(arm).positions;
        if (t.axis.empty()) t.axis = axis;
        else if (t.axis.size() != axis.size())
          cfg_fail(cpath, "scan grids within one target must have equal point counts");
        t.channels.push_back(ChannelSpec::intensity_scan(arm, axis));
      } else {
        double p = parse_length(require(jchan, cpath, "position"), cpath + ".position");
        t.channels.push_back(ChannelSpec::intensity(arm, p));
      }
    }
    plan.targets.push_back(std::move(t));
  }
  try {
    plan.validate();
  } catch (const std::exception& e) {
    cfg_fail(path, e.what());
  }
  return plan;
}

}  // namespace detail

inline RunConfig parse_config(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("config error at '.': document must be an object");
  RunConfig cfg;

  const json& jl = require(doc, "", "layout");
  cfg.layout.wavelength = parse_length(require(jl, "layout", "wavelength"), "layout.wavelength");
  cfg.layout.aperture = parse_length(require(jl, "layout", "aperture"), "layout.aperture");
  cfg.layout.pixel_count =
      jl.contains("pixel_count")
          ? static_cast<int>(parse_int(jl.at("pixel_count"), "layout.pixel_count", 1))
          : 64;
  const json& jd = require(jl, "layout", "distances");
  if (!jd.is_array() || jd.size() < 2) cfg_fail("layout.distances", "must list >= 2 distances");
  cfg.layout.distances.clear();
  for (std::size_t i = 0; i < jd.size(); ++i)
    cfg.layout.distances.push_back(
        parse_length(jd[i], "layout.distances[" + std::to_string(i) + "]"));
  cfg.layout.arm_count = static_cast<int>(cfg.layout.distances.size());
  if (jl.contains("arm_count")) {
    int declared = static_cast<int>(parse_int(jl.at("arm_count"), "layout.arm_count", 2));
    if (declared != cfg.layout.arm_count)
      cfg_fail("layout.distances", "length " + std::to_string(cfg.layout.distances.size()) +
                                       " does not match arm_count " + std::to_string(declared));
  }
  try {
    cfg.layout.validate();
  } catch (const std::exception& e) {
    cfg_fail("layout", e.what());
  }

  cfg.mode = parse_mode(require(doc, "", "mode"), "mode", cfg.layout.arm_count);
  cfg.samples = parse_int(require(doc, "", "samples"), "samples", 1);
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer())
      cfg_fail("seed", "must be an integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("chunk_size"))
    cfg.chunk_size = static_cast<int>(parse_int(doc.at("chunk_size"), "chunk_size", 1));
  if (doc.contains("workers"))
    cfg.workers = static_cast<int>(parse_int(doc.at("workers"), "workers", 1));
  if (doc.contains("alphabet_size"))
    cfg.alphabet_size = static_cast<int>(parse_int(doc.at("alphabet_size"), "alphabet_size", 0));
  if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
  if (doc.contains("scenario"))
    cfg.scenario = parse_scenario(doc.at("scenario").get<std::string>(), "scenario");

  cfg.grids = default_detector_grids(cfg.layout);
  if (doc.contains("grids")) {
    const json& jg = doc.at("grids");
    if (!jg.is_array() || static_cast<int>(jg.size()) != cfg.layout.arm_count)
      cfg_fail("grids", "must list one grid per arm");
    for (int n = 0; n < cfg.layout.arm_count; ++n) {
      std::string gp = "grids[" + std::to_string(n) + "]";
      const json& g = jg[n];
      double center =
          g.contains("center") ? parse_length(g.at("center"), gp + ".center") : 0.0;
      double span = parse_length(require(g, gp, "span"), gp + ".span");
      double step = parse_length(require(g, gp, "step"), gp + ".step");
      try {
        cfg.grids[n] = DetectorGrid::make(n, center, span, step);
      } catch (const std::exception& e) {
        cfg_fail(gp, e.what());
      }
    }
  }

  if (doc.contains("object")) {
    const json& jo = doc.at("object");
    ObjectSpec obj;
    const json& jp = require(jo, "object", "points");
    if (!jp.is_array() || jp.empty()) cfg_fail("object.points", "must be a non-empty array");
    for (std::size_t i = 0; i < jp.size(); ++i) {
      std::string pp = "object.points[" + std::to_string(i) + "]";
      ObjectSpec::Point p;
      p.position = parse_length(require(jp[i], pp, "position"), pp + ".position");
      if (jp[i].contains("transmission")) {
        if (!jp[i].at("transmission").is_number())
          cfg_fail(pp + ".transmission", "must be a number");
        p.transmission = jp[i].at("transmission").get<double>();
      }
      obj.points.push_back(p);
    }
    try {
      obj.validate(cfg.grids[0]);
    } catch (const std::exception& e) {
      cfg_fail("object", e.what());
    }
    cfg.object = std::move(obj);
    if (jo.contains("mode")) {
      std::string m = jo.at("mode").get<std::string>();
      if (m == "fixed_x2") cfg.ghost.mode = GhostMode::FixedX2ScanX3;
      else if (m == "diagonal") cfg.ghost.mode = GhostMode::DiagonalX2EqX3;
      else if (m == "control") cfg.ghost.mode = GhostMode::SecondOrderControl;
      else cfg_fail("object.mode", "invalid mode '" + m + "' (fixed_x2/diagonal/control)");
    }
    if (jo.contains("estimator")) {
      std::string e = jo.at("estimator").get<std::string>();
      if (e == "conditional") cfg.ghost.estimator = GhostEstimator::ConditionalCovariance;
      else if (e == "direct") cfg.ghost.estimator = GhostEstimator::DirectCumulant;
      else cfg_fail("object.estimator", "invalid estimator '" + e + "' (conditional/direct)");
    }
    if (jo.contains("threshold_fraction")) {
      if (!jo.at("threshold_fraction").is_number())
        cfg_fail("object.threshold_fraction", "must be a number");
      cfg.ghost.threshold_fraction = jo.at("threshold_fraction").get<double>();
      if (cfg.ghost.threshold_fraction <= 0.0 || cfg.ghost.threshold_fraction >= 1.0)
        cfg_fail("object.threshold_fraction", "must be in (0,1)");
    }
  }

  if (cfg.scenario == Scenario::Custom) {
    cfg.plan = parse_targets(require(doc, "", "targets"), "targets", cfg);
  } else if (doc.contains("targets")) {
    cfg.plan = parse_targets(doc.at("targets"), "targets", cfg);
  }
  if (cfg.scenario == Scenario::Ghost && !cfg.object)
    cfg_fail("object", "ghost scenario requires an object");
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error at '.': not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Serialization (for cache metadata and the parse/serialize round trip).

namespace detail {

inline std::string format_length(double meters) {
  std::ostringstream os;
  os.precision(17);
  os << meters << " m";
  return os.str();
}

}  // namespace detail

inline json serialize_config(const RunConfig& cfg) {
  json doc;
  json jl;
  jl["wavelength"] = detail::format_length(cfg.layout.wavelength);
  jl["aperture"] = detail::format_length(cfg.layout.aperture);
  jl["pixel_count"] = cfg.layout.pixel_count;
  jl["arm_count"] = cfg.layout.arm_count;
  json jd = json::array();
  for (double d : cfg.layout.distances) jd.push_back(detail::format_length(d));
  jl["distances"] = std::move(jd);
  doc["layout"] = std::move(jl);

  json jm;
  switch (cfg.mode.kind) {
    case MaskMode::Kind::GhzSum:
      jm["kind"] = "ghz";
      jm["constrained_arm"] = cfg.mode.constrained_arm;
      break;
    case MaskMode::Kind::Identical: jm["kind"] = "identical"; break;
    case MaskMode::Kind::Independent: jm["kind"] = "independent"; break;
    case MaskMode::Kind::CustomLinear:
      jm["kind"] = "custom_linear";
      jm["coefficients"] = cfg.mode.coefficients;
      break;
  }
  doc["mode"] = std::move(jm);

  doc["samples"] = cfg.samples;
  doc["seed"] = cfg.seed;
  doc["chunk_size"] = cfg.chunk_size;
  doc["workers"] = cfg.workers;
  doc["alphabet_size"] = cfg.alphabet_size;
  doc["output_dir"] = cfg.output_dir;
  switch (cfg.scenario) {
    case Scenario::Ghz: doc["scenario"] = "ghz"; break;
    case Scenario::W: doc["scenario"] = "w"; break;
    case Scenario::NOrder: doc["scenario"] = "norder"; break;
    case Scenario::Ghost: doc["scenario"] = "ghost"; break;
    case Scenario::Custom: doc["scenario"] = "custom"; break;
  }

  json jg = json::array();
  for (const auto& g : cfg.grids) {
    json e;
    e["center"] = detail::format_length(g.center);
    e["span"] = detail::format_length(g.span);
    e["step"] = detail::format_length(g.step);
    jg.push_back(std::move(e));
  }
  doc["grids"] = std::move(jg);

  if (!cfg.plan.targets.empty()) {
    json jt = json::array();
    for (const auto& t : cfg.plan.targets) {
      json te;
      te["name"] = t.name;
      json jc = json::array();
      for (const auto& c : t.channels) {
        json ce;
        ce["arm"] = c.factors.at(0).arm;
        if (c.factors.at(0).pos_kind == ChannelSpec::PosKind::Scan)
          ce["scan"] = true;
        else
          ce["position"] = detail::format_length(c.factors.at(0).positions.at(0));
        jc.push_back(std::move(ce));
      }
      te["channels"] = std::move(jc);
      jt.push_back(std::move(te));
    }
    doc["targets"] = std::move(jt);
  }

  if (cfg.object) {
    json jo;
    json jp = json::array();
    for (const auto& p : cfg.object->points) {
      json pe;
      pe["position"] = detail::format_length(p.position);
      pe["transmission"] = p.transmission;
      jp.push_back(std::move(pe));
    }
    jo["points"] = std::move(jp);
    switch (cfg.ghost.mode) {
      case GhostMode::FixedX2ScanX3: jo["mode"] = "fixed_x2"; break;
      case GhostMode::DiagonalX2EqX3: jo["mode"] = "diagonal"; break;
      case GhostMode::SecondOrderControl: jo["mode"] = "control"; break;
    }
    jo["estimator"] = cfg.ghost.estimator == GhostEstimator::ConditionalCovariance
                          ? "conditional"
                          : "direct";
    jo["threshold_fraction"] = cfg.ghost.threshold_fraction;
    doc["object"] = std::move(jo);
  }
  return doc;
}

// A canonical fingerprint of everything that determines the accumulated sums.
// Worker count and output directory are deliberately excluded.
inline std::string config_fingerprint(const RunConfig& cfg) {
  json doc = serialize_config(cfg);
  doc.erase("workers");
  doc.erase("output_dir");
  return doc.dump();
}

}  // namespace hocs
