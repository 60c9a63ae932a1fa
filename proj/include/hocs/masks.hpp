#pragma once

// Random phase-mask ensembles. Four generation modes:
//   Independent  — every arm gets its own i.i.d. uniform mask,
//   Identical    — one mask copied to all arms,
//   GhzSum       — one arm carries the mod-2pi sum of all the others,
//   CustomLinear — arm n carries c_n times one shared mask (integer c_n).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hocs/geometry.hpp"
#include "hocs/rng.hpp"

namespace hocs {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double wrap_phase(double phi) {
  double r = std::fmod(phi, two_pi);
  return r < 0.0 ? r + two_pi : r;
}

struct MaskMode {
  enum class Kind { GhzSum, Identical, Independent, CustomLinear };
  Kind kind = Kind::Independent;
  int constrained_arm = 0;            // GhzSum: 0-based arm holding the sum
  std::vector<int> coefficients;      // CustomLinear: integer multiplier per arm

  static MaskMode ghz_sum(int constrained_arm = 0) {
    return {Kind::GhzSum, constrained_arm, {}};
  }
  static MaskMode identical() { return {Kind::Identical, 0, {}}; }
  static MaskMode independent() { return {Kind::Independent, 0, {}}; }
  static MaskMode custom_linear(std::vector<int> coeffs) {
    return {Kind::CustomLinear, 0, std::move(coeffs)};
  }

  void validate(int arm_count) const {
    switch (kind) {
      case Kind::GhzSum:
        if (constrained_arm < 0 || constrained_arm >= arm_count)
          throw std::invalid_argument("mask mode: constrained arm out of range");
        break;
      case Kind::CustomLinear: {
        if (static_cast<int>(coefficients.size()) != arm_count)
          throw std::invalid_argument("mask mode: custom coefficients must have one entry per arm");
        bool any = false;
        for (int c : coefficients) any = any || c != 0;
        if (!any) throw std::invalid_argument("mask mode: custom coefficients must not all be zero");
        break;
      }
      default:
        break;
    }
  }

  // Number of independently drawn masks per sample.
  int independent_mask_count(int arm_count) const {
    switch (kind) {
      case Kind::GhzSum: return arm_count - 1;
      case Kind::Identical: return 1;
      case Kind::CustomLinear: return 1;
      default: return arm_count;
    }
  }
};

struct PhaseMaskSample {
  std::int64_t sample_index = 0;
  std::vector<std::vector<double>> phases;  // [arm][pixel], radians in [0, 2pi)
};

// Optional quantization onto the oracle's alphabet {2*pi*l/L}. L = 0 keeps
// phases continuous.
inline double draw_phase(const RngPolicy& rng, std::uint64_t k, std::uint32_t arm,
                         std::uint32_t pixel, int alphabet_size = 0) {
  double u = rng.uniform(k, arm, pixel);
  if (alphabet_size > 0)
    return two_pi * std::floor(u * alphabet_size) / alphabet_size;
  return two_pi * u;
}

inline PhaseMaskSample generate_sample(const MaskMode& mode, const OpticalLayout& layout,
                                       const RngPolicy& rng, std::int64_t k,
                                       int alphabet_size = 0) {
  if (k < 0) throw std::invalid_argument("sample index must be >= 0");
  layout.validate();
  mode.validate(layout.arm_count);
  const int n_arms = layout.arm_count;
  const int m = layout.pixel_count;

  PhaseMaskSample s;
  s.sample_index = k;
  s.phases.assign(n_arms, std::vector<double>(m));

  switch (mode.kind) {
    case MaskMode::Kind::Independent:
      for (int n = 0; n < n_arms; ++n)
        for (int p = 0; p < m; ++p)
          s.phases[n][p] = draw_phase(rng, k, n, p, alphabet_size);
      break;
    case MaskMode::Kind::Identical:
      for (int p = 0; p < m; ++p) s.phases[0][p] = draw_phase(rng, k, 0, p, alphabet_size);
      for (int n = 1; n < n_arms; ++n) s.phases[n] = s.phases[0];
      break;
    case MaskMode::Kind::GhzSum: {
      const int c = mode.constrained_arm;
      for (int n = 0; n < n_arms; ++n) {
        if (n == c) continue;
        for (int p = 0; p < m; ++p) s.phases[n][p] = draw_phase(rng, k, n, p, alphabet_size);
      }
      for (int p = 0; p < m; ++p) {
        double sum = 0.0;
        for (int n = 0; n < n_arms; ++n)
          if (n != c) sum += s.phases[n][p];
        s.phases[c][p] = wrap_phase(sum);
      }
      break;
    }
    case MaskMode::Kind::CustomLinear:
      for (int p = 0; p < m; ++p) {
        double base = draw_phase(rng, k, 0, p, alphabet_size);
        for (int n = 0; n < n_arms; ++n)
          s.phases[n][p] = wrap_phase(mode.coefficients[n] * base);
      }
      break;
  }
  return s;
}

// Smallest absolute representative of phi mod 2pi.
inline double circular_distance(double phi) {
  double r = wrap_phase(phi);
  return r > std::numbers::pi ? two_pi - r : r;
}

inline bool verify_mode(const PhaseMaskSample& sample, const MaskMode& mode,
                        double tol = 1e-12) {
  const int n_arms = static_cast<int>(sample.phases.size());
  if (n_arms == 0) throw std::invalid_argument("empty sample");
  const std::size_t m = sample.phases[0].size();
  mode.validate(n_arms);

  switch (mode.kind) {
    case MaskMode::Kind::Independent:
      return true;
    case MaskMode::Kind::Identical:
      for (int n = 1; n < n_arms; ++n)
        for (std::size_t p = 0; p < m; ++p)
          if (circular_distance(sample.phases[n][p] - sample.phases[0][p]) > tol) return false;
      return true;
    case MaskMode::Kind::GhzSum: {
      const int c = mode.constrained_arm;
      for (std::size_t p = 0; p < m; ++p) {
        double sum = 0.0;
        for (int n = 0; n < n_arms; ++n)
          if (n != c) sum += sample.phases[n][p];
        if (circular_distance(sum - sample.phases[c][p]) > tol) return false;
      }
      return true;
    }
    case MaskMode::Kind::CustomLinear: {
      // All arms must be consistent multiples of arm with coefficient +-1 if
      // one exists; otherwise check pairwise cross relations c_j*phi_i = c_i*phi_j.
      for (std::size_t p = 0; p < m; ++p)
        for (int i = 0; i < n_arms; ++i)
          for (int j = i + 1; j < n_arms; ++j) {
            double lhs = mode.coefficients[j] * sample.phases[i][p];
            double rhs = mode.coefficients[i] * sample.phases[j][p];
            double scale = std::max(1.0, std::abs(double(mode.coefficients[i])) +
                                             std::abs(double(mode.coefficients[j])));
            if (circular_distance(lhs - rhs) > tol * scale) return false;
          }
      return true;
    }
  }
  return false;
}

// Sample mean of e^{i m phi} at a fixed (arm, pixel) across an ensemble.
inline std::complex<double> empirical_phase_moments(const std::vector<PhaseMaskSample>& samples,
                                                    int m, int arm, int pixel) {
  if (m == 0) throw std::invalid_argument("phase moment order m must be nonzero");
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  std::complex<double> acc{0.0, 0.0};
  for (const auto& s : samples) {
    double phi = s.phases.at(arm).at(pixel);
    acc += std::polar(1.0, m * phi);
  }
  return acc / static_cast<double>(samples.size());
}

}  // namespace hocs
