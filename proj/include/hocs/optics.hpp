#pragma once

// Fresnel propagation from the masked source plane to the detection planes.
// The quadratic-phase kernel is kept at unit modulus (no 1/(i*lambda*d)
// prefactor); every reported correlation is normalized so absolute scale
// cancels.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hocs/geometry.hpp"
#include "hocs/masks.hpp"

namespace hocs {

using cplx = std::complex<double>;

// exp(i*pi*(x-xi)^2 / (lambda*d)), |value| = 1.
inline cplx fresnel_kernel(double x, double xi, double wavelength, double distance) {
  if (!(distance > 0.0)) throw std::domain_error("fresnel_kernel: distance must be > 0");
  if (!(wavelength > 0.0)) throw std::domain_error("fresnel_kernel: wavelength must be > 0");
  double u = x - xi;
  double phase = std::numbers::pi * u * u / (wavelength * distance);
  return std::polar(1.0, std::remainder(phase, two_pi));
}

struct ComplexField {
  int arm_index = 0;
  DetectorGrid grid;
  std::vector<cplx> amplitudes;
};

struct IntensitySample {
  std::int64_t sample_index = 0;
  std::vector<std::vector<double>> per_arm;  // [arm][detector position]
};

// Kernel table h_n(x_q, xi_j) for one arm: row-major [position][pixel].
struct KernelTable {
  std::size_t n_positions = 0;
  std::size_t n_pixels = 0;
  std::vector<cplx> values;

  const cplx* row(std::size_t q) const { return values.data() + q * n_pixels; }
};

inline KernelTable build_kernel_table(const std::vector<double>& positions,
                                      const SourceGrid& source, double wavelength,
                                      double distance) {
  KernelTable t;
  t.n_positions = positions.size();
  t.n_pixels = source.positions.size();
  t.values.resize(t.n_positions * t.n_pixels);
  for (std::size_t q = 0; q < t.n_positions; ++q)
    for (std::size_t j = 0; j < t.n_pixels; ++j)
      t.values[q * t.n_pixels + j] =
          fresnel_kernel(positions[q], source.positions[j], wavelength, distance);
  return t;
}

// E(x) = sum_xi e^{i phi(xi)} h(x, xi), direct O(M*P) quadrature.
inline ComplexField propagate(const std::vector<double>& mask_phases, const SourceGrid& source,
                              const DetectorGrid& grid, double wavelength, double distance) {
  if (mask_phases.size() != source.positions.size())
    throw std::invalid_argument("propagate: mask length differs from source grid");
  ComplexField f;
  f.arm_index = grid.arm_index;
  f.grid = grid;
  f.amplitudes.resize(grid.positions.size());
  std::vector<cplx> phasors(mask_phases.size());
  for (std::size_t j = 0; j < mask_phases.size(); ++j)
    phasors[j] = std::polar(1.0, wrap_phase(mask_phases[j]));
  for (std::size_t q = 0; q < grid.positions.size(); ++q) {
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < mask_phases.size(); ++j)
      acc += phasors[j] * fresnel_kernel(grid.positions[q], source.positions[j],
                                         wavelength, distance);
    f.amplitudes[q] = acc;
  }
  return f;
}

inline IntensitySample intensities(const std::vector<ComplexField>& fields,
                                   std::int64_t sample_index = 0) {
  IntensitySample s;
  s.sample_index = sample_index;
  s.per_arm.reserve(fields.size());
  for (const auto& f : fields) {
    std::vector<double> I(f.amplitudes.size());
    for (std::size_t q = 0; q < I.size(); ++q) I[q] = std::norm(f.amplitudes[q]);
    s.per_arm.push_back(std::move(I));
  }
  return s;
}

}  // namespace hocs
