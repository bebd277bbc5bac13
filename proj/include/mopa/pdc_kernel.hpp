// Copyright 2026 The mopa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MOPA_PDC_KERNEL_HPP
#define MOPA_PDC_KERNEL_HPP

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "mopa/linalg.hpp"

namespace mopa {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

double wavelength_nm_to_omega(double wavelength_nm);  // rad/s
double omega_to_wavelength_nm(double omega);

// Frequency bins, uniform in angular frequency. The outermost bins sit
// exactly on center +- span/2 in wavelength; bin 0 is the shortest
// wavelength.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  FrequencyGrid(double center_wavelength_nm, double span_nm, std::size_t n_points);

  std::size_t size() const { return omegas_.size(); }
  Index isize() const { return static_cast<Index>(omegas_.size()); }
  double center_wavelength_nm() const { return center_nm_; }
  double span_nm() const { return span_nm_; }
  double omega(std::size_t i) const { return omegas_[i]; }
  double wavelength_nm(std::size_t i) const { return wavelengths_nm_[i]; }
  const std::vector<double>& omegas() const { return omegas_; }
  const std::vector<double>& wavelengths_nm() const { return wavelengths_nm_; }
  double bin_width() const { return bin_width_; }  // rad/s
  double mean_wavelength_step_nm() const;
  // Mask of bins whose wavelength lies in [lo, hi].
  std::vector<bool> window_mask(double lo_nm, double hi_nm) const;

  bool operator==(const FrequencyGrid& other) const {
    return center_nm_ == other.center_nm_ && span_nm_ == other.span_nm_ &&
           omegas_.size() == other.omegas_.size();
  }

 private:
  double center_nm_ = 0.0;
  double span_nm_ = 0.0;
  double bin_width_ = 0.0;
  std::vector<double> omegas_;
  std::vector<double> wavelengths_nm_;
};

// Throws ConfigError on a non-positive span, a span reaching zero
// wavelength, or fewer than two points.
FrequencyGrid make_grid(double center_wavelength_nm, double span_nm, std::size_t n_points);

enum class PulseShape { gaussian };

struct PumpProfile {
  double center_wavelength_nm = 354.67;
  double pulse_duration_fwhm_ps = 18.0;  // intensity FWHM
  PulseShape shape = PulseShape::gaussian;

  double omega() const;
  // Spectral amplitude width: alpha = exp(-(w - w_p)^2 / (2 sigma^2)).
  double spectral_sigma() const;
};

cplx pump_envelope(const PumpProfile& pump, double omega_sum);

// Amplitude exp(-Omega^2 / (2 width^2)) with Omega = (w_i - w_j) / 2.
// Has no z dependence.
struct GaussianPhaseMatching {
  double width = 0.0;  // rad/s
};

// Collinear mismatch expanded around degeneracy, dk = curvature * Omega^2.
struct QuadraticMismatch {
  double curvature = 0.0;  // s^2 / m
};

using PhaseMatching = std::variant<GaussianPhaseMatching, QuadraticMismatch>;

// Both helpers pick the parameter so that the low-gain spectrum has the
// given intensity FWHM around the degenerate wavelength.
GaussianPhaseMatching gaussian_phase_matching_for_fwhm(double degenerate_nm, double fwhm_nm);
QuadraticMismatch quadratic_mismatch_for_fwhm(double degenerate_nm, double fwhm_nm,
                                              double length_mm);

struct CrystalParams {
  double length_mm = 3.0;
  PhaseMatching phase_matching = GaussianPhaseMatching{};
  // K = coupling_strength * alpha * phi * bin_width, in 1/m per rad/s.
  double coupling_strength = 1.0;

  double length_m() const { return length_mm * 1e-3; }
  bool z_independent() const { return std::holds_alternative<GaussianPhaseMatching>(phase_matching); }
};

// Position-resolved coupling K(z). The mismatch phase is referenced to
// the crystal centre, so K(z) integrates to a real symmetric matrix.
class KernelModel {
 public:
  KernelModel(FrequencyGrid grid, PumpProfile pump, CrystalParams crystal);

  const FrequencyGrid& grid() const { return grid_; }
  const PumpProfile& pump() const { return pump_; }
  const CrystalParams& crystal() const { return crystal_; }
  double length() const { return crystal_.length_m(); }
  bool z_independent() const { return crystal_.z_independent(); }
  double coupling_strength() const { return crystal_.coupling_strength; }

  CMatrix at(double z) const;
  // Closed-form integral of K over the crystal.
  CMatrix integrated() const;
  KernelModel with_coupling_strength(double strength) const;

 private:
  FrequencyGrid grid_;
  PumpProfile pump_;
  CrystalParams crystal_;
  CMatrix amplitude_;  // alpha * |phi| * bin_width at unit strength
  RMatrix mismatch_;   // dk, zero for the Gaussian model
};

struct CouplingKernel {
  FrequencyGrid grid;
  CMatrix matrix;
  double z = 0.0;
};

// Throws InputError when z lies outside [0, L].
CouplingKernel build_kernel(const FrequencyGrid& grid, const PumpProfile& pump,
                            const CrystalParams& crystal, double z);

}  // namespace mopa

#endif  // MOPA_PDC_KERNEL_HPP
