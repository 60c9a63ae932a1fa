#pragma once

// Streaming moment accumulation for planned correlation targets.
//
// A target is an ordered set of channels; per ensemble sample each channel
// yields one value per target point and the accumulator streams sums of the
// per-point channel products (all channel subsets, so cumulants can be formed
// at the end). Sums are kept per chunk; grand totals are always the fold of
// per-chunk sums in ascending chunk order, so any partition of chunks across
// workers reduces to bit-identical results.
//
// Channels are either measured intensities of one arm or composite
// "reference" intensities |sum_xi e^{i phi_a(xi)} prod_f h_f(x_f, xi)^{+-}|^2
// driven by a single arm's mask. The composite form is the
// conditional-expectation (variance-reduced) estimator used by the GHZ-type
// scenarios; plain plans never need it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hocs/geometry.hpp"
#include "hocs/optics.hpp"

namespace hocs {

struct ChannelSpec {
  enum class PosKind { Fixed, Scan, Object };
  struct Factor {
    int arm = 0;
    int sign = +1;                   // conjugate kernel if negative
    PosKind pos_kind = PosKind::Fixed;
    std::vector<double> positions;   // Fixed: 1, Scan: Q, Object: W entries
  };
  int phase_arm = 0;                 // arm whose mask drives the phasor sum
  std::vector<Factor> factors;
  std::vector<double> weights = {1.0};  // size W; {1.0} when no Object factor

  static ChannelSpec intensity(int arm, double fixed_position) {
    ChannelSpec c;
    c.phase_arm = arm;
    c.factors = {{arm, +1, PosKind::Fixed, {fixed_position}}};
    return c;
  }
  static ChannelSpec intensity_scan(int arm, std::vector<double> positions) {
    ChannelSpec c;
    c.phase_arm = arm;
    c.factors = {{arm, +1, PosKind::Scan, std::move(positions)}};
    return c;
  }
};

struct Target {
  std::string name;
  std::vector<ChannelSpec> channels;
  std::vector<double> axis;  // scan coordinate per point; size Q (or empty => 1 point)

  std::size_t points() const { return std::max<std::size_t>(axis.size(), 1); }
  int order() const { return static_cast<int>(channels.size()); }
};

struct CorrelationPlan {
  std::vector<Target> targets;
  int pixel_count = 0;   // M, for the denominator floor
  int chunk_size = 256;

  void validate() const {
    if (targets.empty()) throw std::invalid_argument("plan: no targets");
    if (chunk_size < 1) throw std::invalid_argument("plan: chunk_size must be >= 1");
    if (pixel_count < 1) throw std::invalid_argument("plan: pixel_count must be >= 1");
    for (const auto& t : targets) {
      if (t.channels.empty() || t.channels.size() > 8)
        throw std::invalid_argument("plan: target '" + t.name + "' order out of range");
      for (const auto& c : t.channels) {
        if (c.factors.empty()) throw std::invalid_argument("plan: channel without factors");
        if (c.weights.empty()) throw std::invalid_argument("plan: channel without weights");
        for (const auto& f : c.factors) {
          std::size_t expect = f.pos_kind == ChannelSpec::PosKind::Fixed ? 1
                              : f.pos_kind == ChannelSpec::PosKind::Scan ? t.points()
                                                                         : c.weights.size();
          if (f.positions.size() != expect)
            throw std::invalid_argument("plan: factor position count mismatch in '" + t.name + "'");
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Compiled evaluation (kernel tables baked per channel).

struct CompiledChannel {
  int phase_arm = 0;
  std::size_t Q = 1;
  std::size_t W = 1;
  std::vector<double> weights;
  KernelTable table;  // W*Q rows of M pixels; row index w*Q + q

  void evaluate(const std::vector<std::vector<cplx>>& arm_phasors,
                std::vector<double>& out) const {
    out.assign(Q, 0.0);
    const auto& ph = arm_phasors[phase_arm];
    for (std::size_t w = 0; w < W; ++w)
      for (std::size_t q = 0; q < Q; ++q) {
        const cplx* row = table.row(w * Q + q);
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < ph.size(); ++j) acc += ph[j] * row[j];
        out[q] += weights[w] * std::norm(acc);
      }
  }
};

struct CompiledTarget {
  std::vector<CompiledChannel> channels;
  std::size_t Q = 1;
};

inline CompiledChannel compile_channel(const ChannelSpec& spec, std::size_t Q,
                                       const OpticalLayout& layout, const SourceGrid& source) {
  CompiledChannel cc;
  cc.phase_arm = spec.phase_arm;
  cc.Q = Q;
  cc.W = spec.weights.size();
  cc.weights = spec.weights;
  const std::size_t m = source.positions.size();
  cc.table.n_positions = cc.W * cc.Q;
  cc.table.n_pixels = m;
  cc.table.values.assign(cc.W * cc.Q * m, cplx{1.0, 0.0});
  for (const auto& f : spec.factors) {
    for (std::size_t w = 0; w < cc.W; ++w)
      for (std::size_t q = 0; q < cc.Q; ++q) {
        double x = f.pos_kind == ChannelSpec::PosKind::Fixed ? f.positions[0]
                  : f.pos_kind == ChannelSpec::PosKind::Scan ? f.positions[q]
                                                             : f.positions[w];
        cplx* row = &cc.table.values[(w * cc.Q + q) * m];
        for (std::size_t j = 0; j < m; ++j) {
          cplx k = fresnel_kernel(x, source.positions[j], layout.wavelength,
                                  layout.distances.at(f.arm));
          row[j] *= f.sign >= 0 ? k : std::conj(k);
        }
      }
  }
  return cc;
}

inline std::vector<CompiledTarget> compile_plan(const CorrelationPlan& plan,
                                                const OpticalLayout& layout,
                                                const SourceGrid& source) {
  plan.validate();
  std::vector<CompiledTarget> out;
  out.reserve(plan.targets.size());
  for (const auto& t : plan.targets) {
    CompiledTarget ct;
    ct.Q = t.points();
    for (const auto& c : t.channels)
      ct.channels.push_back(compile_channel(c, ct.Q, layout, source));
    out.push_back(std::move(ct));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Accumulator

struct MomentAccumulator {
  struct ChunkSums {
    // subset[s-1][q]: sum over chunk samples of prod_{c in bitmask s} value_c(q)
    std::vector<std::vector<double>> subset;
    std::vector<double> prod_sq;  // sum of (full product)^2
  };
  struct TargetSums {
    std::size_t Q = 1;
    int order = 0;
    std::vector<ChunkSums> chunks;  // one entry per completed chunk, ascending
    ChunkSums open;                 // partially filled current chunk

    std::size_t n_subsets() const { return (std::size_t{1} << order) - 1; }

    // Grand total of one subset sum: ascending fold over chunks.
    double total_subset(std::size_t s, std::size_t q) const {
      double acc = 0.0;
      for (const auto& c : chunks) acc += c.subset[s][q];
      return acc;
    }
    double total_prod_sq(std::size_t q) const {
      double acc = 0.0;
      for (const auto& c : chunks) acc += c.prod_sq[q];
      return acc;
    }
  };

  std::string fingerprint;   // plan/config identity; merge requires equality
  std::int64_t chunk_size = 256;
  std::int64_t first_chunk = 0;
  std::int64_t end_chunk = 0;     // completed chunks: [first_chunk, end_chunk)
  std::int64_t sample_count = 0;  // completed samples only
  std::int64_t in_chunk = 0;      // samples in the open chunk
  std::vector<std::int64_t> chunk_samples;  // sample count per completed chunk
  std::vector<TargetSums> targets;

  static MomentAccumulator make(const CorrelationPlan& plan, std::string fp = {},
                                std::int64_t first_chunk_index = 0) {
    plan.validate();
    MomentAccumulator acc;
    acc.fingerprint = std::move(fp);
    acc.chunk_size = plan.chunk_size;
    acc.first_chunk = acc.end_chunk = first_chunk_index;
    for (const auto& t : plan.targets) {
      TargetSums ts;
      ts.Q = t.points();
      ts.order = t.order();
      ts.open = empty_chunk(ts);
      acc.targets.push_back(std::move(ts));
    }
    return acc;
  }

  static ChunkSums empty_chunk(const TargetSums& ts) {
    ChunkSums c;
    c.subset.assign(ts.n_subsets(), std::vector<double>(ts.Q, 0.0));
    c.prod_sq.assign(ts.Q, 0.0);
    return c;
  }

  bool at_chunk_boundary() const { return in_chunk == 0; }

  // values[target][channel][point]; single-point channels broadcast over q.
  void accumulate(const std::vector<std::vector<std::vector<double>>>& values) {
    if (values.size() != targets.size())
      throw std::invalid_argument("accumulate: plan mismatch (target count)");
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      auto& ts = targets[ti];
      const auto& ch = values[ti];
      if (static_cast<int>(ch.size()) != ts.order)
        throw std::invalid_argument("accumulate: plan mismatch (channel count)");
      const std::size_t nsub = ts.n_subsets();
      for (std::size_t q = 0; q < ts.Q; ++q) {
        for (std::size_t s = 1; s <= nsub; ++s) {
          double p = 1.0;
          for (int c = 0; c < ts.order; ++c)
            if (s & (std::size_t{1} << c)) p *= ch[c][ch[c].size() == 1 ? 0 : q];
          ts.open.subset[s - 1][q] += p;
          if (s == nsub) ts.open.prod_sq[q] += p * p;
        }
      }
    }
    if (++in_chunk == chunk_size) close_chunk();
  }

  void close_chunk() {
    if (in_chunk == 0) return;
    for (auto& ts : targets) {
      ts.chunks.push_back(std::move(ts.open));
      ts.open = empty_chunk(ts);
    }
    chunk_samples.push_back(in_chunk);
    sample_count += in_chunk;
    in_chunk = 0;
    ++end_chunk;
  }

  void merge(const MomentAccumulator& b) {
    if (fingerprint != b.fingerprint)
      throw std::invalid_argument("merge: accumulators built from different plans");
    if (in_chunk != 0 || b.in_chunk != 0)
      throw std::invalid_argument("merge: both accumulators must be at a chunk boundary");
    if (b.first_chunk != end_chunk)
      throw std::invalid_argument("merge: chunk ranges must be contiguous and ascending");
    if (targets.size() != b.targets.size() || chunk_size != b.chunk_size)
      throw std::invalid_argument("merge: shape mismatch");
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      auto& a = targets[ti];
      const auto& t = b.targets[ti];
      if (a.Q != t.Q || a.order != t.order)
        throw std::invalid_argument("merge: target shape mismatch");
      a.chunks.insert(a.chunks.end(), t.chunks.begin(), t.chunks.end());
    }
    chunk_samples.insert(chunk_samples.end(), b.chunk_samples.begin(), b.chunk_samples.end());
    sample_count += b.sample_count;
    end_chunk = b.end_chunk;
  }
};

// ---------------------------------------------------------------------------
// Estimates

struct TargetEstimate {
  std::string name;
  std::vector<double> axis;
  std::vector<double> g;             // <prod>/prod<.> per point
  std::vector<double> stderr_g;      // batch means over chunks
  std::vector<double> mean_product;  // raw <prod>
  std::vector<std::vector<double>> channel_means;
  int batches = 0;
};

struct CorrelationEstimate {
  std::int64_t sample_count = 0;
  std::vector<TargetEstimate> targets;
};

inline CorrelationEstimate normalized_g(const MomentAccumulator& acc,
                                        const CorrelationPlan& plan) {
  if (acc.sample_count < 2) throw std::invalid_argument("normalized_g: needs K >= 2");
  if (acc.targets.size() != plan.targets.size())
    throw std::invalid_argument("normalized_g: accumulator does not match plan");
  const double floor = 1e-12 * plan.pixel_count;
  CorrelationEstimate est;
  est.sample_count = acc.sample_count;
  const double K = static_cast<double>(acc.sample_count);
  for (std::size_t ti = 0; ti < acc.targets.size(); ++ti) {
    const auto& ts = acc.targets[ti];
    TargetEstimate te;
    te.name = plan.targets[ti].name;
    te.axis = plan.targets[ti].axis;
    te.g.resize(ts.Q);
    te.stderr_g.resize(ts.Q);
    te.mean_product.resize(ts.Q);
    te.channel_means.assign(ts.order, std::vector<double>(ts.Q));
    const std::size_t full = ts.n_subsets();
    te.batches = static_cast<int>(ts.chunks.size());
    for (std::size_t q = 0; q < ts.Q; ++q) {
      double denom = 1.0;
      for (int c = 0; c < ts.order; ++c) {
        double mean_c = ts.total_subset((std::size_t{1} << c) - 1, q) / K;
        te.channel_means[c][q] = mean_c;
        if (mean_c < floor)
          throw std::runtime_error("normalized_g: degenerate denominator in target '" +
                                   te.name + "'");
        denom *= mean_c;
      }
      double mp = ts.total_subset(full - 1, q) / K;
      te.mean_product[q] = mp;
      te.g[q] = mp / denom;
      // batch means over per-chunk product averages
      if (ts.chunks.size() >= 2) {
        double mb = 0.0, m2 = 0.0;
        std::vector<double> bm(ts.chunks.size());
        for (std::size_t b = 0; b < ts.chunks.size(); ++b)
          bm[b] = ts.chunks[b].subset[full - 1][q] /
                  static_cast<double>(acc.chunk_samples[b]);
        for (double v : bm) mb += v;
        mb /= bm.size();
        for (double v : bm) m2 += (v - mb) * (v - mb);
        double var_mean = m2 / (bm.size() - 1) / bm.size();
        te.stderr_g[q] = std::sqrt(std::max(var_mean, 0.0)) / denom;
      } else {
        te.stderr_g[q] = 0.0;
      }
    }
    est.targets.push_back(std::move(te));
  }
  return est;
}

// Normalized third central cross-moment <dI1 dI2 dI3> / prod<I> for an
// order-3 target.
inline std::vector<double> cumulant3(const MomentAccumulator& acc, const CorrelationPlan& plan,
                                     std::size_t target_index) {
  if (acc.sample_count < 2) throw std::invalid_argument("cumulant3: needs K >= 2");
  const auto& ts = acc.targets.at(target_index);
  if (ts.order != 3) throw std::invalid_argument("cumulant3: target order must be 3");
  const double K = static_cast<double>(acc.sample_count);
  const double floor = 1e-12 * plan.pixel_count;
  std::vector<double> out(ts.Q);
  for (std::size_t q = 0; q < ts.Q; ++q) {
    auto m = [&](std::size_t mask) { return ts.total_subset(mask - 1, q) / K; };
    double m1 = m(0b001), m2 = m(0b010), m3 = m(0b100);
    if (m1 < floor || m2 < floor || m3 < floor)
      throw std::runtime_error("cumulant3: degenerate denominator");
    double c = m(0b111) - m(0b011) * m3 - m(0b101) * m2 - m(0b110) * m1 + 2.0 * m1 * m2 * m3;
    out[q] = c / (m1 * m2 * m3);
  }
  return out;
}

struct FlatnessResult {
  double max_deviation = 0.0;
  double argmax_axis = 0.0;
  std::size_t argmax_index = 0;
};

inline FlatnessResult flatness_statistic(const TargetEstimate& te) {
  FlatnessResult r;
  for (std::size_t q = 0; q < te.g.size(); ++q) {
    double dev = std::abs(te.g[q] - 1.0);
    if (dev >= r.max_deviation) {
      r.max_deviation = dev;
      r.argmax_index = q;
      r.argmax_axis = te.axis.empty() ? 0.0 : te.axis[q];
    }
  }
  return r;
}

}  // namespace hocs
