#pragma once

// Ground-truth validator: exact correlation moments for tiny instances by
// complete enumeration of every phase-mask assignment over a discrete
// alphabet {2*pi*l/L}. No sampling, no pairing algebra — just the definition
// of the expectation value.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hocs/correlator.hpp"
#include "hocs/geometry.hpp"
#include "hocs/masks.hpp"

namespace hocs {

struct DiscreteAlphabet {
  int size = 8;  // L

  std::vector<double> values() const {
    std::vector<double> v(size);
    for (int l = 0; l < size; ++l) v[l] = two_pi * l / size;
    return v;
  }

  // L >= 2N+2 guarantees <e^{i m phi}> = 0 for all 0 < |m| <= 2N+1, covering
  // every coefficient the order-N moment algebra can produce.
  void validate(int arm_count) const {
    if (size < 2 * arm_count + 2)
      throw std::invalid_argument("alphabet too small: need L >= 2N+2");
  }
};

// (1/L) sum_l e^{i m 2 pi l / L}: 1 if L divides m, else 0.
inline cplx alphabet_moment_check(const DiscreteAlphabet& alphabet, int m) {
  cplx acc{0.0, 0.0};
  for (int l = 0; l < alphabet.size; ++l)
    acc += std::polar(1.0, m * two_pi * l / alphabet.size);
  return acc / static_cast<double>(alphabet.size);
}

struct ExactCorrelationResult {
  std::uint64_t enumeration_count = 0;
  struct TargetResult {
    std::vector<double> axis;
    std::vector<double> g;                          // exact <prod>/prod<.>
    std::vector<double> mean_product;               // exact <prod>
    std::vector<std::vector<double>> channel_means; // exact per-channel means
  };
  std::vector<TargetResult> targets;
};

inline ExactCorrelationResult exact_correlation(const MaskMode& mode,
                                                const OpticalLayout& layout,
                                                const DiscreteAlphabet& alphabet,
                                                const CorrelationPlan& plan,
                                                double enumeration_limit = 1e7) {
  layout.validate();
  mode.validate(layout.arm_count);
  alphabet.validate(layout.arm_count);
  plan.validate();

  const int m = layout.pixel_count;
  const int n_arms = layout.arm_count;
  const int s_count = mode.independent_mask_count(n_arms);
  const int digits = s_count * m;
  const double count_f = std::pow(double(alphabet.size), digits);
  if (count_f > enumeration_limit)
    throw std::invalid_argument("oracle instance too large: L^(M*S) exceeds the limit");
  const std::uint64_t count = static_cast<std::uint64_t>(std::llround(count_f));

  SourceGrid src = build_source_grid(layout);
  auto compiled = compile_plan(plan, layout, src);
  const auto alpha_values = alphabet.values();

  // Map independent mask index -> arm carrying it (for GhzSum the constrained
  // arm has no mask of its own).
  std::vector<int> mask_arm;
  switch (mode.kind) {
    case MaskMode::Kind::Independent:
      for (int n = 0; n < n_arms; ++n) mask_arm.push_back(n);
      break;
    case MaskMode::Kind::GhzSum:
      for (int n = 0; n < n_arms; ++n)
        if (n != mode.constrained_arm) mask_arm.push_back(n);
      break;
    default:
      mask_arm.push_back(0);
      break;
  }

  // Kahan-compensated exact sums.
  struct Slot { double sum = 0.0, comp = 0.0; void add(double v) {
    double y = v - comp; double t = sum + y; comp = (t - sum) - y; sum = t; } };
  std::vector<std::vector<std::vector<Slot>>> sums(plan.targets.size());
  for (std::size_t ti = 0; ti < plan.targets.size(); ++ti) {
    std::size_t nch = plan.targets[ti].channels.size();
    sums[ti].assign(nch + 1, std::vector<Slot>(compiled[ti].Q));  // last = product
  }

  std::vector<int> odo(digits, 0);
  std::vector<std::vector<double>> phases(s_count, std::vector<double>(m, 0.0));
  std::vector<std::vector<cplx>> arm_phasors(n_arms, std::vector<cplx>(m));
  std::vector<std::vector<double>> ch_values;
  for (std::uint64_t it = 0; it < count; ++it) {
    // arm phases from the independent masks per the mode
    for (int n = 0; n < n_arms; ++n) {
      for (int p = 0; p < m; ++p) {
        double phi = 0.0;
        switch (mode.kind) {
          case MaskMode::Kind::Independent: phi = phases[n][p]; break;
          case MaskMode::Kind::Identical: phi = phases[0][p]; break;
          case MaskMode::Kind::CustomLinear: phi = mode.coefficients[n] * phases[0][p]; break;
          case MaskMode::Kind::GhzSum: {
            if (n == mode.constrained_arm) {
              for (int s = 0; s < s_count; ++s) phi += phases[s][p];
            } else {
              int s = 0;
              for (int nn = 0; nn < n_arms; ++nn) {
                if (nn == mode.constrained_arm) continue;
                if (nn == n) break;
                ++s;
              }
              phi = phases[s][p];
            }
            break;
          }
        }
        arm_phasors[n][p] = std::polar(1.0, phi);
      }
    }
    for (std::size_t ti = 0; ti < compiled.size(); ++ti) {
      const auto& ct = compiled[ti];
      ch_values.assign(ct.channels.size(), {});
      for (std::size_t c = 0; c < ct.channels.size(); ++c)
        ct.channels[c].evaluate(arm_phasors, ch_values[c]);
      for (std::size_t q = 0; q < ct.Q; ++q) {
        double prod = 1.0;
        for (std::size_t c = 0; c < ct.channels.size(); ++c) {
          double v = ch_values[c][ch_values[c].size() == 1 ? 0 : q];
          sums[ti][c][q].add(v);
          prod *= v;
        }
        sums[ti].back()[q].add(prod);
      }
    }
    // odometer step
    int d = 0;
    while (d < digits) {
      int s = d / m, p = d % m;
      if (++odo[d] < alphabet.size) {
        phases[s][p] = alpha_values[odo[d]];
        break;
      }
      odo[d] = 0;
      phases[s][p] = alpha_values[0];
      ++d;
    }
    if (d == digits && it + 1 != count)
      throw std::logic_error("oracle enumeration count mismatch");
  }

  ExactCorrelationResult res;
  res.enumeration_count = count;
  for (std::size_t ti = 0; ti < plan.targets.size(); ++ti) {
    ExactCorrelationResult::TargetResult tr;
    tr.axis = plan.targets[ti].axis;
    std::size_t nch = plan.targets[ti].channels.size();
    std::size_t Q = compiled[ti].Q;
    tr.g.resize(Q);
    tr.mean_product.resize(Q);
    tr.channel_means.assign(nch, std::vector<double>(Q));
    for (std::size_t q = 0; q < Q; ++q) {
      double denom = 1.0;
      for (std::size_t c = 0; c < nch; ++c) {
        tr.channel_means[c][q] = sums[ti][c][q].sum / double(count);
        denom *= tr.channel_means[c][q];
      }
      tr.mean_product[q] = sums[ti].back()[q].sum / double(count);
      tr.g[q] = tr.mean_product[q] / denom;
    }
    res.targets.push_back(std::move(tr));
  }
  return res;
}

}  // namespace hocs
