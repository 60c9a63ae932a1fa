#pragma once

// Optical layout and detector discretization for the N-arm correlation
// simulator. One transverse dimension; all lengths in meters.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hocs {

struct OpticalLayout {
  double wavelength = 0.0;         // lambda [m]
  double aperture = 0.0;           // SLM size D [m]
  int pixel_count = 64;            // M, SLM pixels across the aperture
  int arm_count = 0;               // N >= 2
  std::vector<double> distances;   // d_1..d_N [m]

  void validate() const {
    if (!(wavelength > 0.0)) throw std::invalid_argument("layout.wavelength must be > 0");
    if (!(aperture > 0.0)) throw std::invalid_argument("layout.aperture must be > 0");
    if (pixel_count < 1) throw std::invalid_argument("layout.pixel_count must be >= 1");
    if (arm_count < 2) throw std::invalid_argument("layout.arm_count must be >= 2");
    if (static_cast<int>(distances.size()) != arm_count)
      throw std::invalid_argument("layout.distances must have arm_count entries, got " +
                                  std::to_string(distances.size()));
    for (double d : distances)
      if (!(d > 0.0)) throw std::invalid_argument("layout.distances entries must be > 0");
  }

  // Transverse correlation width lambda*d/D at the plane of arm `n` (0-based).
  double correlation_width(int n) const { return wavelength * distances.at(n) / aperture; }
};

struct SourceGrid {
  std::vector<double> positions;  // pixel centers xi [m], symmetric about 0
  double pitch = 0.0;             // D/M [m]
};

struct DetectorGrid {
  int arm_index = 0;      // 0-based
  double center = 0.0;    // [m]
  double span = 0.0;      // [m]
  double step = 0.0;      // [m]
  std::vector<double> positions;

  static DetectorGrid make(int arm, double center, double span, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("detector grid step must be > 0");
    if (span < step) throw std::invalid_argument("detector grid span must be >= step");
    DetectorGrid g;
    g.arm_index = arm;
    g.center = center;
    g.span = span;
    g.step = step;
    // Odd point count so the center is always a grid point.
    int half = static_cast<int>(std::ceil(span / (2.0 * step)));
    g.positions.reserve(2 * half + 1);
    for (int i = -half; i <= half; ++i) g.positions.push_back(center + i * step);
    return g;
  }

  std::size_t size() const { return positions.size(); }
};

inline SourceGrid build_source_grid(const OpticalLayout& layout) {
  layout.validate();
  SourceGrid g;
  const int m = layout.pixel_count;
  g.pitch = layout.aperture / m;
  g.positions.resize(m);
  for (int j = 0; j < m; ++j)
    g.positions[j] = (j - 0.5 * (m - 1)) * g.pitch;
  return g;
}

struct BalanceReport {
  double residual = 0.0;  // 1/d_1 - sum_{n>=2} 1/d_n  [1/m]
  bool satisfied = false;
};

// N-order balance condition 1/d_1 = sum_{n=2}^{N} 1/d_n. The tolerance is
// dimensionless, relative to d_1.
inline BalanceReport check_balance_condition(const OpticalLayout& layout,
                                             double tolerance = 1e-9) {
  if (layout.distances.size() < 2)
    throw std::invalid_argument("balance condition needs at least two distances");
  for (double d : layout.distances)
    if (!(d > 0.0)) throw std::invalid_argument("balance condition: distances must be > 0");
  BalanceReport r;
  r.residual = 1.0 / layout.distances[0];
  for (std::size_t n = 1; n < layout.distances.size(); ++n)
    r.residual -= 1.0 / layout.distances[n];
  r.satisfied = std::abs(r.residual) * layout.distances[0] <= tolerance;
  return r;
}

// Per-arm grids covering +/-6 correlation widths at step width/10, centered
// on 0. These defaults are artifact choices (see README).
inline std::vector<DetectorGrid> default_detector_grids(const OpticalLayout& layout,
                                                        double widths = 6.0,
                                                        double points_per_width = 10.0) {
  layout.validate();
  std::vector<DetectorGrid> grids;
  grids.reserve(layout.arm_count);
  for (int n = 0; n < layout.arm_count; ++n) {
    double w = layout.correlation_width(n);
    grids.push_back(DetectorGrid::make(n, 0.0, 2.0 * widths * w, w / points_per_width));
  }
  return grids;
}

}  // namespace hocs
