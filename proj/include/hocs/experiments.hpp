#pragma once

// Packaged scenarios: GHZ scan, W scan, N-order generalization, and the
// three-point ghost-imaging experiment.
//
// GHZ-type surfaces are estimated with the conditional-expectation
// (variance-reduced) covariance estimator: the masks shared only with the
// constrained arm are integrated analytically, which leaves a second-order
// fluctuation correlation between one measured intensity and a composite
// reference intensity. The estimator is unbiased for the same ensemble
// moment and reports in interference-term units (balance-point peak
// 2 - 1/M). The plain product estimator remains available through the
// correlator for every target built from measured intensities only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hocs/analytic.hpp"
#include "hocs/correlator.hpp"
#include "hocs/engine.hpp"
#include "hocs/geometry.hpp"
#include "hocs/masks.hpp"

namespace hocs {

// ---------------------------------------------------------------------------
// Plan builders

// Interference-unit GHZ target: measured intensity of `drive_arm` at
// `drive_position` against the composite reference over the remaining arms.
// positions[n] gives a fixed position per arm; `scan_arm` runs over `axis`.
inline Target ghz_interference_target(std::string name, const MaskMode& mode, int arm_count,
                                      int drive_arm, const std::vector<double>& fixed_positions,
                                      int scan_arm, std::vector<double> axis) {
  if (mode.kind != MaskMode::Kind::GhzSum)
    throw std::invalid_argument("ghz_interference_target: GhzSum mode required");
  const int c = mode.constrained_arm;
  if (drive_arm == c) throw std::invalid_argument("drive arm must be unconstrained");
  Target t;
  t.name = std::move(name);
  t.axis = std::move(axis);
  ChannelSpec drive = scan_arm == drive_arm
                          ? ChannelSpec::intensity_scan(drive_arm, t.axis)
                          : ChannelSpec::intensity(drive_arm, fixed_positions.at(drive_arm));
  ChannelSpec ref;
  ref.phase_arm = drive_arm;  // the drive arm's mask also appears in the constrained arm
  ref.weights = {1.0};
  for (int n = 0; n < arm_count; ++n) {
    if (n == drive_arm) continue;
    ChannelSpec::Factor f;
    f.arm = n;
    f.sign = n == c ? +1 : -1;
    if (n == scan_arm) {
      f.pos_kind = ChannelSpec::PosKind::Scan;
      f.positions = t.axis;
    } else {
      f.pos_kind = ChannelSpec::PosKind::Fixed;
      f.positions = {fixed_positions.at(n)};
    }
    ref.factors.push_back(std::move(f));
  }
  t.channels = {std::move(drive), std::move(ref)};
  return t;
}

inline Target pair_scan_target(std::string name, int fixed_arm, double fixed_pos, int scan_arm,
                               std::vector<double> axis) {
  Target t;
  t.name = std::move(name);
  t.axis = std::move(axis);
  t.channels = {ChannelSpec::intensity(fixed_arm, fixed_pos),
                ChannelSpec::intensity_scan(scan_arm, t.axis)};
  return t;
}

inline Target diagonal_scan_target(std::string name, std::vector<int> arms,
                                   std::vector<double> axis) {
  Target t;
  t.name = std::move(name);
  t.axis = std::move(axis);
  for (int a : arms) t.channels.push_back(ChannelSpec::intensity_scan(a, t.axis));
  return t;
}

// ---------------------------------------------------------------------------
// Peak location

struct Peak {
  double position = 0.0;
  double height = 0.0;
};

// Strict local maxima above threshold_fraction * global max, with parabolic
// sub-grid refinement. The profile should be background-free (see callers).
inline std::vector<Peak> locate_peaks(const std::vector<double>& profile,
                                      const std::vector<double>& axis,
                                      double threshold_fraction = 0.5) {
  if (threshold_fraction <= 0.0 || threshold_fraction >= 1.0)
    throw std::invalid_argument("locate_peaks: threshold_fraction must be in (0,1)");
  if (profile.size() != axis.size())
    throw std::invalid_argument("locate_peaks: profile/axis size mismatch");
  std::vector<Peak> peaks;
  if (profile.size() < 3) return peaks;
  double global = *std::max_element(profile.begin(), profile.end());
  if (!(global > 0.0)) return peaks;
  double thr = threshold_fraction * global;
  for (std::size_t i = 1; i + 1 < profile.size(); ++i) {
    if (!(profile[i] > profile[i - 1] && profile[i] > profile[i + 1])) continue;
    if (profile[i] < thr) continue;
    double y0 = profile[i - 1], y1 = profile[i], y2 = profile[i + 1];
    double denom = y0 - 2.0 * y1 + y2;
    double delta = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    delta = std::clamp(delta, -0.5, 0.5);
    double step = axis[i + 1] - axis[i];
    peaks.push_back({axis[i] + delta * step, y1});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.position < b.position; });
  return peaks;
}

// ---------------------------------------------------------------------------
// GHZ scenario

struct PairFlatness {
  std::string name;
  double max_deviation = 0.0;
  double argmax_axis = 0.0;
};

struct GhzReport {
  std::vector<double> axis;        // x3 scan [m]
  std::vector<double> g3;          // interference units
  std::vector<double> stderr_g3;
  std::vector<double> predicted;   // continuum 1 + sinc^2
  double rms_residual = 0.0;
  double peak_value = 0.0;
  double peak_position = 0.0;
  double first_zero = 0.0;         // |x3| of the first minimum of g3 - 1
  double grid_step = 0.0;
  std::vector<PairFlatness> pair_flatness;
  std::int64_t samples = 0;
};

inline GhzReport run_ghz_scenario(const OpticalLayout& layout, std::int64_t samples,
                                  std::uint64_t seed, int workers = 1, int chunk_size = 256) {
  layout.validate();
  if (layout.arm_count != 3) throw std::invalid_argument("run_ghz_scenario: needs 3 arms");
  if (!check_balance_condition(layout).satisfied)
    throw std::invalid_argument("run_ghz_scenario: balance condition violated");
  MaskMode mode = MaskMode::ghz_sum(0);
  auto grids = default_detector_grids(layout);

  CorrelationPlan plan;
  plan.pixel_count = layout.pixel_count;
  plan.chunk_size = chunk_size;
  plan.targets.push_back(ghz_interference_target("g3_slice", mode, 3, 1, {0.0, 0.0, 0.0}, 2,
                                                 grids[2].positions));
  const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
  for (auto [i, j] : pairs)
    plan.targets.push_back(pair_scan_target(
        "g2_" + std::to_string(i + 1) + std::to_string(j + 1), i, 0.0, j, grids[j].positions));

  EnsembleSpec spec{layout, mode, RngPolicy{seed}, samples, 0};
  auto acc = run_ensemble(spec, plan, workers);
  auto est = normalized_g(acc, plan);

  GhzReport rep;
  rep.samples = acc.sample_count;
  rep.axis = est.targets[0].axis;
  rep.g3 = est.targets[0].g;
  rep.stderr_g3 = est.targets[0].stderr_g;
  rep.grid_step = grids[2].step;
  double ss = 0.0;
  rep.predicted.resize(rep.axis.size());
  for (std::size_t q = 0; q < rep.axis.size(); ++q) {
    rep.predicted[q] = predicted_g3_ghz(0.0, 0.0, rep.axis[q], layout);
    double r = rep.g3[q] - rep.predicted[q];
    ss += r * r;
  }
  rep.rms_residual = std::sqrt(ss / rep.axis.size());
  std::size_t pk = std::max_element(rep.g3.begin(), rep.g3.end()) - rep.g3.begin();
  rep.peak_value = rep.g3[pk];
  rep.peak_position = rep.axis[pk];

  // First zero of g3 - 1: minimum of the symmetrized profile in
  // [0.5, 1.5] correlation widths, parabolic-refined.
  double width = layout.correlation_width(2);
  std::size_t n = rep.axis.size();
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  std::vector<double> symm(n);
  for (std::size_t q = 0; q < n; ++q) {
    std::size_t qm = n - 1 - q;  // grid symmetric about 0
    symm[q] = 0.5 * (rep.g3[q] + rep.g3[qm]);
  }
  for (std::size_t q = 0; q < n; ++q) {
    double x = rep.axis[q];
    if (x < 0.5 * width || x > 1.5 * width) continue;
    if (symm[q] < best_v) { best_v = symm[q]; best = q; }
  }
  if (best > 0 && best + 1 < n) {
    double y0 = symm[best - 1], y1 = symm[best], y2 = symm[best + 1];
    double denom = y0 - 2.0 * y1 + y2;
    double delta = denom != 0.0 ? std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5) : 0.0;
    rep.first_zero = rep.axis[best] + delta * rep.grid_step;
  } else {
    rep.first_zero = rep.axis[best];
  }

  for (std::size_t ti = 1; ti < est.targets.size(); ++ti) {
    auto f = flatness_statistic(est.targets[ti]);
    rep.pair_flatness.push_back({est.targets[ti].name, f.max_deviation, f.argmax_axis});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// W scenario

struct WReport {
  double g2_coincidence = 0.0;     // diagonal-averaged, arms 2-3
  double g2_coincidence_err = 0.0;
  double g3_coincidence = 0.0;     // diagonal-averaged triple (equal distances)
  double g3_coincidence_err = 0.0;
  bool g3_coincidence_valid = false;
  std::vector<double> g2_axis, g2_scan, g2_predicted;   // g2(0, x) profile, arms 2-3
  double g2_rms_residual = 0.0;
  std::vector<double> g3_axis, g3_scan, g3_predicted;   // g3(0, 0, x) profile
  double g3_rms_residual = 0.0;
  std::set<int> surviving_orders;
  std::int64_t samples = 0;
};

inline WReport run_w_scenario(const OpticalLayout& layout, std::int64_t samples,
                              std::uint64_t seed, int workers = 1, int chunk_size = 256) {
  layout.validate();
  if (layout.arm_count != 3) throw std::invalid_argument("run_w_scenario: needs 3 arms");
  if (std::abs(layout.distances[1] - layout.distances[2]) > 1e-12)
    throw std::invalid_argument("run_w_scenario: needs d2 == d3 for the diagonal scan");
  MaskMode mode = MaskMode::identical();
  auto grids = default_detector_grids(layout);
  bool equal_d = std::abs(layout.distances[0] - layout.distances[1]) < 1e-12;

  CorrelationPlan plan;
  plan.pixel_count = layout.pixel_count;
  plan.chunk_size = chunk_size;
  plan.targets.push_back(diagonal_scan_target("g2_diag_23", {1, 2}, grids[1].positions));
  plan.targets.push_back(pair_scan_target("g2_scan_23", 1, 0.0, 2, grids[2].positions));
  Target g3s;
  g3s.name = "g3_slice";
  g3s.axis = grids[2].positions;
  g3s.channels = {ChannelSpec::intensity(0, 0.0), ChannelSpec::intensity(1, 0.0),
                  ChannelSpec::intensity_scan(2, g3s.axis)};
  plan.targets.push_back(std::move(g3s));
  if (equal_d)
    plan.targets.push_back(diagonal_scan_target("g3_diag_123", {0, 1, 2}, grids[1].positions));

  EnsembleSpec spec{layout, mode, RngPolicy{seed}, samples, 0};
  auto acc = run_ensemble(spec, plan, workers);
  auto est = normalized_g(acc, plan);

  WReport rep;
  rep.samples = acc.sample_count;
  auto average = [](const TargetEstimate& te, double& out, double& err) {
    double s = 0.0, e2 = 0.0;
    for (std::size_t q = 0; q < te.g.size(); ++q) {
      s += te.g[q];
      e2 += te.stderr_g[q] * te.stderr_g[q];
    }
    out = s / te.g.size();
    // points are correlated across the diagonal; keep the per-point error scale
    err = std::sqrt(e2) / te.g.size();
  };
  average(est.targets[0], rep.g2_coincidence, rep.g2_coincidence_err);

  rep.g2_axis = est.targets[1].axis;
  rep.g2_scan = est.targets[1].g;
  double ss = 0.0;
  for (std::size_t q = 0; q < rep.g2_axis.size(); ++q) {
    rep.g2_predicted.push_back(predicted_g2_w(0.0, rep.g2_axis[q], 1, 2, layout, true));
    double r = rep.g2_scan[q] - rep.g2_predicted[q];
    ss += r * r;
  }
  rep.g2_rms_residual = std::sqrt(ss / rep.g2_axis.size());

  rep.g3_axis = est.targets[2].axis;
  rep.g3_scan = est.targets[2].g;
  ss = 0.0;
  for (std::size_t q = 0; q < rep.g3_axis.size(); ++q) {
    rep.g3_predicted.push_back(predicted_g3_w(0.0, 0.0, rep.g3_axis[q], layout));
    double r = rep.g3_scan[q] - rep.g3_predicted[q];
    ss += r * r;
  }
  rep.g3_rms_residual = std::sqrt(ss / rep.g3_axis.size());

  if (equal_d) {
    average(est.targets[3], rep.g3_coincidence, rep.g3_coincidence_err);
    rep.g3_coincidence_valid = true;
  }
  rep.surviving_orders = classify_structure(mode, 3).surviving_orders;
  return rep;
}

// ---------------------------------------------------------------------------
// N-order scenario

struct NOrderReport {
  std::vector<double> axis;
  std::vector<double> gn;          // interference units, scan of the last arm
  double peak_value = 0.0;
  double peak_position = 0.0;
  std::vector<PairFlatness> subset_flatness;  // all pairs and (reduced) triples
  std::int64_t samples = 0;
};

inline NOrderReport run_norder_scenario(const OpticalLayout& layout, std::int64_t samples,
                                        std::uint64_t seed, int workers = 1,
                                        int chunk_size = 256) {
  layout.validate();
  const int N = layout.arm_count;
  if (N < 3) throw std::invalid_argument("run_norder_scenario: needs N >= 3");
  if (!check_balance_condition(layout).satisfied)
    throw std::invalid_argument("run_norder_scenario: balance condition violated");
  MaskMode mode = MaskMode::ghz_sum(0);
  auto grids = default_detector_grids(layout);

  CorrelationPlan plan;
  plan.pixel_count = layout.pixel_count;
  plan.chunk_size = chunk_size;
  std::vector<double> zeros(N, 0.0);
  plan.targets.push_back(ghz_interference_target("g" + std::to_string(N) + "_slice", mode, N, 1,
                                                 zeros, N - 1, grids[N - 1].positions));
  // All pairs, as measured intensities.
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      plan.targets.push_back(pair_scan_target(
          "g2_" + std::to_string(i + 1) + std::to_string(j + 1), i, 0.0, j, grids[j].positions));
  // All triples. The mask that appears in exactly one arm of the subset is
  // integrated out analytically (its expectation is exactly flat), reducing
  // each triple to a measured pair; see header comment.
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      for (int k = j + 1; k < N; ++k) {
        int a = j, b = k;       // drop arm i == 0 (constrained) -> pair (j,k)
        if (i != 0) { a = i; b = j; }  // independent arms: drop the last
        plan.targets.push_back(pair_scan_target("g3_" + std::to_string(i + 1) +
                                                    std::to_string(j + 1) + std::to_string(k + 1) +
                                                    "_rb",
                                                a, 0.0, b, grids[b].positions));
      }

  EnsembleSpec spec{layout, mode, RngPolicy{seed}, samples, 0};
  auto acc = run_ensemble(spec, plan, workers);
  auto est = normalized_g(acc, plan);

  NOrderReport rep;
  rep.samples = acc.sample_count;
  rep.axis = est.targets[0].axis;
  rep.gn = est.targets[0].g;
  std::size_t pk = std::max_element(rep.gn.begin(), rep.gn.end()) - rep.gn.begin();
  rep.peak_value = rep.gn[pk];
  rep.peak_position = rep.axis[pk];
  for (std::size_t ti = 1; ti < est.targets.size(); ++ti) {
    auto f = flatness_statistic(est.targets[ti]);
    rep.subset_flatness.push_back({est.targets[ti].name, f.max_deviation, f.argmax_axis});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ghost imaging

struct ObjectSpec {
  struct Point {
    double position = 0.0;      // on arm 1's object plane [m]
    double transmission = 1.0;  // in [0,1]
  };
  std::vector<Point> points;

  void validate(const DetectorGrid& arm1_grid) const {
    if (points.empty()) throw std::invalid_argument("object: empty");
    double lo = arm1_grid.positions.front(), hi = arm1_grid.positions.back();
    for (const auto& p : points) {
      if (p.position < lo || p.position > hi)
        throw std::invalid_argument("object: point outside arm 1 grid");
      if (p.transmission < 0.0 || p.transmission > 1.0)
        throw std::invalid_argument("object: transmission must be in [0,1]");
    }
  }
};

enum class GhostMode { FixedX2ScanX3, DiagonalX2EqX3, SecondOrderControl };
enum class GhostEstimator { ConditionalCovariance, DirectCumulant };

struct GhostImageResult {
  GhostMode mode = GhostMode::FixedX2ScanX3;
  std::vector<double> axis;      // scan positions [m]
  std::vector<double> profile;   // reconstruction, baseline ~ 1
  std::vector<Peak> peaks;       // on the background-subtracted profile
  double background = 0.0;
  double contrast = 0.0;         // (peak - background) / background
  double magnification = 0.0;    // 0 when peak count != object point count
  std::int64_t samples = 0;
};

inline GhostImageResult run_ghost_imaging(const OpticalLayout& layout, const ObjectSpec& object,
                                          GhostMode gmode, std::int64_t samples,
                                          std::uint64_t seed, int workers = 1,
                                          int chunk_size = 256,
                                          GhostEstimator estimator = GhostEstimator::ConditionalCovariance,
                                          double threshold_fraction = 0.5) {
  layout.validate();
  if (layout.arm_count != 3) throw std::invalid_argument("ghost imaging: needs 3 arms");
  if (!check_balance_condition(layout).satisfied)
    throw std::invalid_argument("ghost imaging: balance condition violated");
  MaskMode mode = MaskMode::ghz_sum(0);
  auto grids = default_detector_grids(layout);
  object.validate(grids[0]);

  std::vector<double> obj_pos, obj_T;
  for (const auto& p : object.points) {
    obj_pos.push_back(p.position);
    obj_T.push_back(p.transmission);
  }
  const std::vector<double>& axis = grids[2].positions;
  const double M = layout.pixel_count;

  CorrelationPlan plan;
  plan.pixel_count = layout.pixel_count;
  plan.chunk_size = chunk_size;

  Target t;
  t.axis = axis;
  if (gmode == GhostMode::SecondOrderControl) {
    // <dB dI2>: bucket of measured arm-1 intensities against a scanned arm 2.
    t.name = "ghost_g2_control";
    ChannelSpec bucket;
    bucket.phase_arm = 0;
    bucket.weights = obj_T;
    bucket.factors = {{0, +1, ChannelSpec::PosKind::Object, obj_pos}};
    t.channels = {std::move(bucket), ChannelSpec::intensity_scan(1, axis)};
  } else if (estimator == GhostEstimator::ConditionalCovariance) {
    t.name = "ghost_g3";
    ChannelSpec drive = gmode == GhostMode::FixedX2ScanX3
                            ? ChannelSpec::intensity(1, 0.0)
                            : ChannelSpec::intensity_scan(1, axis);
    ChannelSpec ref;  // sum_p T_p |sum_xi e^{i phi_2} h_1(p) h_3^*(x)|^2
    ref.phase_arm = 1;
    ref.weights = obj_T;
    ref.factors = {{0, +1, ChannelSpec::PosKind::Object, obj_pos},
                   {2, -1, ChannelSpec::PosKind::Scan, axis}};
    t.channels = {std::move(drive), std::move(ref)};
  } else {
    t.name = "ghost_g3_direct";
    ChannelSpec bucket;
    bucket.phase_arm = 0;
    bucket.weights = obj_T;
    bucket.factors = {{0, +1, ChannelSpec::PosKind::Object, obj_pos}};
    ChannelSpec i2 = gmode == GhostMode::FixedX2ScanX3 ? ChannelSpec::intensity(1, 0.0)
                                                       : ChannelSpec::intensity_scan(1, axis);
    t.channels = {std::move(bucket), std::move(i2), ChannelSpec::intensity_scan(2, axis)};
  }
  plan.targets.push_back(std::move(t));

  EnsembleSpec spec{layout, mode, RngPolicy{seed}, samples, 0};
  auto acc = run_ensemble(spec, plan, workers);
  auto est = normalized_g(acc, plan);

  GhostImageResult res;
  res.mode = gmode;
  res.axis = axis;
  res.samples = acc.sample_count;
  if (gmode == GhostMode::SecondOrderControl) {
    res.profile = est.targets[0].g;  // expected exactly flat
  } else if (estimator == GhostEstimator::ConditionalCovariance) {
    res.profile = est.targets[0].g;  // 1 + sum_p w_p |mu_p|^2 - 1/M
  } else {
    auto c3 = cumulant3(acc, plan, 0);
    res.profile.resize(c3.size());
    for (std::size_t q = 0; q < c3.size(); ++q) res.profile[q] = 1.0 + M * c3[q];
  }

  // Background = median; peaks on the background-subtracted profile.
  std::vector<double> sorted = res.profile;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  res.background = sorted[sorted.size() / 2];
  std::vector<double> sub(res.profile.size());
  for (std::size_t q = 0; q < sub.size(); ++q) sub[q] = res.profile[q] - res.background;
  res.peaks = locate_peaks(sub, axis, threshold_fraction);
  double peak = *std::max_element(res.profile.begin(), res.profile.end());
  res.contrast = res.background > 0.0 ? (peak - res.background) / res.background : 0.0;

  if (res.peaks.size() == object.points.size()) {
    std::vector<double> op = obj_pos;
    std::sort(op.begin(), op.end());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
      num += res.peaks[i].position * op[i];
      den += op[i] * op[i];
    }
    res.magnification = den > 0.0 ? num / den : 0.0;
  }
  return res;
}

}  // namespace hocs
