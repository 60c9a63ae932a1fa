#pragma once

// Output artifacts: CSV profiles with SI base units in headers and JSON
// metric summaries. CSV bytes are canonical: shortest round-trip formatting,
// '\n' line endings, no locale dependence — identical runs produce identical
// files regardless of worker count.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hocs/correlator.hpp"
#include "hocs/experiments.hpp"

namespace hocs {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lg", &back);
    if (back == v) break;
  }
  return buf;
}

struct CsvColumn {
  std::string header;  // e.g. "x3_m", "g3"
  const std::vector<double>* values = nullptr;
};

inline std::string render_csv(const std::vector<CsvColumn>& columns) {
  if (columns.empty()) throw IoError("csv: no columns");
  std::size_t rows = columns[0].values->size();
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].values->size() != rows) throw IoError("csv: ragged columns");
    if (c) out += ',';
    out += columns[c].header;
  }
  out += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double((*columns[c].values)[r]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

inline void write_json_file(const std::string& path, const nlohmann::json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Per-structure renderers

inline std::string target_csv(const TargetEstimate& te, const std::string& axis_header) {
  return render_csv({{axis_header, &te.axis}, {"g", &te.g}, {"stderr", &te.stderr_g}});
}

inline std::string ghz_csv(const GhzReport& rep) {
  return render_csv({{"x3_m", &rep.axis}, {"g3", &rep.g3}, {"stderr", &rep.stderr_g3}});
}

inline std::string ghz_predicted_csv(const GhzReport& rep) {
  return render_csv({{"x3_m", &rep.axis}, {"g3_predicted", &rep.predicted}});
}

inline nlohmann::json ghz_summary(const GhzReport& rep) {
  nlohmann::json j;
  j["samples"] = rep.samples;
  j["peak_value"] = rep.peak_value;
  j["peak_position_m"] = rep.peak_position;
  j["first_zero_m"] = rep.first_zero;
  j["grid_step_m"] = rep.grid_step;
  j["rms_residual"] = rep.rms_residual;
  nlohmann::json flat = nlohmann::json::array();
  for (const auto& f : rep.pair_flatness)
    flat.push_back({{"target", f.name}, {"max_abs_dev", f.max_deviation},
                    {"argmax_m", f.argmax_axis}});
  j["pair_flatness"] = std::move(flat);
  return j;
}

inline std::string w_csv(const WReport& rep) {
  return render_csv({{"x3_m", &rep.g3_axis},
                     {"g3", &rep.g3_scan},
                     {"g3_predicted", &rep.g3_predicted},
                     {"g2_scan", &rep.g2_scan},
                     {"g2_predicted", &rep.g2_predicted}});
}

inline nlohmann::json w_summary(const WReport& rep) {
  nlohmann::json j;
  j["samples"] = rep.samples;
  j["g2_coincidence"] = rep.g2_coincidence;
  j["g2_coincidence_stderr"] = rep.g2_coincidence_err;
  j["g2_rms_residual"] = rep.g2_rms_residual;
  j["g3_rms_residual"] = rep.g3_rms_residual;
  if (rep.g3_coincidence_valid) {
    j["g3_coincidence"] = rep.g3_coincidence;
    j["g3_coincidence_stderr"] = rep.g3_coincidence_err;
  }
  j["surviving_orders"] = rep.surviving_orders;
  return j;
}

inline std::string norder_csv(const NOrderReport& rep) {
  return render_csv({{"xN_m", &rep.axis}, {"gN", &rep.gn}});
}

inline nlohmann::json norder_summary(const NOrderReport& rep) {
  nlohmann::json j;
  j["samples"] = rep.samples;
  j["peak_value"] = rep.peak_value;
  j["peak_position_m"] = rep.peak_position;
  nlohmann::json flat = nlohmann::json::array();
  for (const auto& f : rep.subset_flatness)
    flat.push_back({{"target", f.name}, {"max_abs_dev", f.max_deviation},
                    {"argmax_m", f.argmax_axis}});
  j["subset_flatness"] = std::move(flat);
  return j;
}

inline std::string ghost_csv(const GhostImageResult& res) {
  return render_csv({{"x_m", &res.axis}, {"profile", &res.profile}});
}

inline nlohmann::json ghost_summary(const GhostImageResult& res) {
  nlohmann::json j;
  j["samples"] = res.samples;
  switch (res.mode) {
    case GhostMode::FixedX2ScanX3: j["mode"] = "fixed_x2"; break;
    case GhostMode::DiagonalX2EqX3: j["mode"] = "diagonal"; break;
    case GhostMode::SecondOrderControl: j["mode"] = "control"; break;
  }
  nlohmann::json peaks = nlohmann::json::array();
  for (const auto& p : res.peaks)
    peaks.push_back({{"position_m", p.position}, {"height", p.height}});
  j["peaks"] = std::move(peaks);
  j["background"] = res.background;
  j["contrast"] = res.contrast;
  j["magnification"] = res.magnification;
  return j;
}

}  // namespace hocs
