#pragma once

// Closed-form and quadrature predictions for the correlation surfaces, plus
// the pairing-survival algebra that classifies which correlation orders a
// mask mode can exhibit.
//
// Conventions: GHZ-type surfaces are reported in interference-term units
// ("1 + cross-term"), the normalization in which the balance-point peak is 2.
// Identical-mode (W-type) surfaces are plain <prod I>/prod<I>.

#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include "hocs/geometry.hpp"
#include "hocs/masks.hpp"
#include "hocs/optics.hpp"

namespace hocs {

struct Mu {
  cplx value{0.0, 0.0};
};

// (1/M) sum_xi prod_n h_n(x_n, xi)^{sign_n}; |value| <= 1.
inline Mu mu_overlap(const std::vector<double>& positions, const OpticalLayout& layout,
                     const std::vector<int>& signs) {
  if (positions.size() != signs.size())
    throw std::invalid_argument("mu_overlap: positions/signs size mismatch");
  layout.validate();
  SourceGrid src = build_source_grid(layout);
  cplx acc{0.0, 0.0};
  for (double xi : src.positions) {
    cplx term{1.0, 0.0};
    for (std::size_t n = 0; n < positions.size(); ++n) {
      cplx k = fresnel_kernel(positions[n], xi, layout.wavelength, layout.distances.at(n));
      term *= signs[n] >= 0 ? k : std::conj(k);
    }
    acc += term;
  }
  return Mu{acc / static_cast<double>(src.positions.size())};
}

inline double sinc_squared(double u) {
  if (std::abs(u) < 1e-4) {
    double u2 = u * u;
    double s = 1.0 - u2 / 6.0 + u2 * u2 / 120.0;  // sin(u)/u series
    return s * s;
  }
  double s = std::sin(u) / u;
  return s * s;
}

// Eq.-of-motion argument u = (pi*D/lambda) * (x_1/d_1 - sum_{n>=2} x_n/d_n).
inline double ghz_argument(const std::vector<double>& positions, const OpticalLayout& layout) {
  double v = positions.at(0) / layout.distances.at(0);
  for (std::size_t n = 1; n < positions.size(); ++n)
    v -= positions[n] / layout.distances.at(n);
  return std::numbers::pi * layout.aperture / layout.wavelength * v;
}

// Continuum GHZ law 1 + sinc^2(u); valid only under the balance condition.
inline double predicted_g3_ghz(double x1, double x2, double x3, const OpticalLayout& layout,
                               double balance_tolerance = 1e-9) {
  if (!check_balance_condition(layout, balance_tolerance).satisfied)
    throw std::domain_error(
        "predicted_g3_ghz: balance condition violated; use quadrature_g3_ghz");
  return 1.0 + sinc_squared(ghz_argument({x1, x2, x3}, layout));
}

// Discrete-M quadrature of the GHZ cross term, normalized so the far-offset
// background is 1: g = 1 + |mu(+,-,-,...)|^2 - 1/M. Works off-balance.
inline double quadrature_gn_ghz(const std::vector<double>& positions,
                                const OpticalLayout& layout) {
  std::vector<int> signs(positions.size(), -1);
  signs.at(0) = +1;
  Mu mu = mu_overlap(positions, layout, signs);
  return 1.0 + std::norm(mu.value) - 1.0 / layout.pixel_count;
}

inline double quadrature_g3_ghz(double x1, double x2, double x3, const OpticalLayout& layout) {
  return quadrature_gn_ghz({x1, x2, x3}, layout);
}

// Pairwise kernel overlap mu_ij between arms i and j (signs +,-).
inline cplx mu_pair(double xi_pos, double xj_pos, int arm_i, int arm_j,
                    const OpticalLayout& layout) {
  layout.validate();
  SourceGrid src = build_source_grid(layout);
  cplx acc{0.0, 0.0};
  for (double xi : src.positions)
    acc += fresnel_kernel(xi_pos, xi, layout.wavelength, layout.distances.at(arm_i)) *
           std::conj(fresnel_kernel(xj_pos, xi, layout.wavelength, layout.distances.at(arm_j)));
  return acc / static_cast<double>(src.positions.size());
}

// Identical-mask pairwise correlation 1 + |mu_ij|^2 (thermal-like). The
// optional diagonal correction -1/M makes it the exact discrete expectation.
inline double predicted_g2_w(double x_i, double x_j, int arm_i, int arm_j,
                             const OpticalLayout& layout,
                             bool include_diagonal_correction = false) {
  double mu2 = std::norm(mu_pair(x_i, x_j, arm_i, arm_j, layout));
  return 1.0 + mu2 - (include_diagonal_correction ? 1.0 / layout.pixel_count : 0.0);
}

// Identical-mask triple correlation from the permutation expansion:
// 1 + |mu12|^2 + |mu13|^2 + |mu23|^2 + 2 Re(mu12 mu23 mu31).
inline double predicted_g3_w(double x1, double x2, double x3, const OpticalLayout& layout) {
  cplx m12 = mu_pair(x1, x2, 0, 1, layout);
  cplx m13 = mu_pair(x1, x3, 0, 2, layout);
  cplx m23 = mu_pair(x2, x3, 1, 2, layout);
  return 1.0 + std::norm(m12) + std::norm(m13) + std::norm(m23) +
         2.0 * std::real(m12 * m23 * std::conj(m13));
}

// ---------------------------------------------------------------------------
// Mask-coefficient matrix and the pairing algebra.

// c[n][s]: integer coefficient of independent mask s in arm n's phase.
inline std::vector<std::vector<int>> mask_coefficients(const MaskMode& mode, int arm_count) {
  mode.validate(arm_count);
  std::vector<std::vector<int>> c;
  switch (mode.kind) {
    case MaskMode::Kind::Independent:
      c.assign(arm_count, std::vector<int>(arm_count, 0));
      for (int n = 0; n < arm_count; ++n) c[n][n] = 1;
      break;
    case MaskMode::Kind::Identical:
      c.assign(arm_count, std::vector<int>(1, 1));
      break;
    case MaskMode::Kind::CustomLinear:
      c.assign(arm_count, std::vector<int>(1, 0));
      for (int n = 0; n < arm_count; ++n) c[n][0] = mode.coefficients[n];
      break;
    case MaskMode::Kind::GhzSum: {
      int s_count = arm_count - 1;
      c.assign(arm_count, std::vector<int>(s_count, 0));
      int s = 0;
      for (int n = 0; n < arm_count; ++n) {
        if (n == mode.constrained_arm) continue;
        c[n][s] = 1;
        c[mode.constrained_arm][s] = 1;
        ++s;
      }
      break;
    }
  }
  return c;
}

// Exact discrete expectation <prod_{n in arms} I_n(x_n)> / prod <I_n> by
// enumerating all index pairings whose per-mask, per-pixel integer
// coefficients cancel. Independent of the phase-enumeration oracle.
// Valid whenever phases are continuous uniform, or drawn from an alphabet of
// size L > 2*order (all surviving coefficient sums are then identical).
inline double pairing_moment(const MaskMode& mode, const OpticalLayout& layout,
                             const std::vector<int>& arms, const std::vector<double>& positions,
                             double enumeration_limit = 1e8) {
  layout.validate();
  if (arms.size() != positions.size())
    throw std::invalid_argument("pairing_moment: arms/positions size mismatch");
  const int n = static_cast<int>(arms.size());
  const int m = layout.pixel_count;
  if (std::pow(double(m), 2.0 * n) > enumeration_limit)
    throw std::invalid_argument("pairing_moment: instance too large");
  auto coeff = mask_coefficients(mode, layout.arm_count);
  const int s_count = static_cast<int>(coeff[0].size());
  SourceGrid src = build_source_grid(layout);

  // Kernel values per target slot.
  std::vector<std::vector<cplx>> h(n, std::vector<cplx>(m));
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < m; ++j)
      h[t][j] = fresnel_kernel(positions[t], src.positions[j], layout.wavelength,
                               layout.distances.at(arms[t]));

  std::vector<int> idx(2 * n, 0);  // a_0..a_{n-1}, a'_0..a'_{n-1}
  std::vector<int> net(m, 0);
  double total = 0.0, comp = 0.0;  // Kahan
  for (;;) {
    bool ok = true;
    for (int s = 0; s < s_count && ok; ++s) {
      std::fill(net.begin(), net.end(), 0);
      for (int t = 0; t < n; ++t) {
        net[idx[t]] += coeff[arms[t]][s];
        net[idx[n + t]] -= coeff[arms[t]][s];
      }
      for (int p = 0; p < m; ++p)
        if (net[p] != 0) { ok = false; break; }
    }
    if (ok) {
      cplx term{1.0, 0.0};
      for (int t = 0; t < n; ++t) term *= h[t][idx[t]] * std::conj(h[t][idx[n + t]]);
      double v = std::real(term);
      double y = v - comp;
      double s = total + y;
      comp = (s - total) - y;
      total = s;
    }
    int d = 0;
    while (d < 2 * n && ++idx[d] == m) idx[d++] = 0;
    if (d == 2 * n) break;
  }
  // <I_n> = M for every arm under these statistics.
  return total / std::pow(double(m), n);
}

// ---------------------------------------------------------------------------
// Structure classification

struct StructurePrediction {
  MaskMode mode;
  int arm_count = 0;
  std::set<int> surviving_orders;
  bool order_survives(int o) const { return surviving_orders.count(o) > 0; }
};

namespace detail {

// A subset of arms carries correlation structure iff some nontrivial
// two-pixel placement of kets and bras cancels every mask's integer
// coefficients on both pixels.
inline bool subset_survives(const std::vector<std::vector<int>>& coeff,
                            const std::vector<int>& arms) {
  const int n = static_cast<int>(arms.size());
  const int s_count = static_cast<int>(coeff[0].size());
  const int combos = 1 << (2 * n);  // ket and bra pixel bits per arm
  for (int c = 1; c < combos; ++c) {
    bool nontrivial = false;
    for (int t = 0; t < n; ++t) {
      int ket = (c >> t) & 1;
      int bra = (c >> (n + t)) & 1;
      if (ket != bra) { nontrivial = true; break; }
    }
    if (!nontrivial) continue;
    bool ok = true;
    for (int s = 0; s < s_count && ok; ++s) {
      int net0 = 0;
      for (int t = 0; t < n; ++t) {
        int ket = (c >> t) & 1;
        int bra = (c >> (n + t)) & 1;
        if (ket == 0) net0 += coeff[arms[t]][s];
        if (bra == 0) net0 -= coeff[arms[t]][s];
      }
      // pixel-1 balance follows from pixel-0 balance (total is conserved)
      int total = 0;
      for (int t = 0; t < n; ++t) {
        int ket = (c >> t) & 1;
        int bra = (c >> (n + t)) & 1;
        if (ket == 1) total += coeff[arms[t]][s];
        if (bra == 1) total -= coeff[arms[t]][s];
      }
      ok = net0 == 0 && total == 0;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace detail

inline StructurePrediction classify_structure(const MaskMode& mode, int arm_count) {
  mode.validate(arm_count);
  StructurePrediction sp;
  sp.mode = mode;
  sp.arm_count = arm_count;
  auto coeff = mask_coefficients(mode, arm_count);
  // enumerate subsets of arms of size >= 2
  for (int mask = 1; mask < (1 << arm_count); ++mask) {
    std::vector<int> arms;
    for (int n = 0; n < arm_count; ++n)
      if (mask & (1 << n)) arms.push_back(n);
    if (arms.size() < 2) continue;
    if (detail::subset_survives(coeff, arms))
      sp.surviving_orders.insert(static_cast<int>(arms.size()));
  }
  return sp;
}

}  // namespace hocs
