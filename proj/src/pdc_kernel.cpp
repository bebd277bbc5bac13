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

#include "mopa/pdc_kernel.hpp"

#include <cmath>

#include "mopa/errors.hpp"

namespace mopa {

double wavelength_nm_to_omega(double wavelength_nm) {
  return 2.0 * kPi * kSpeedOfLight / (wavelength_nm * 1e-9);
}

double omega_to_wavelength_nm(double omega) { return 2.0 * kPi * kSpeedOfLight / omega * 1e9; }

FrequencyGrid::FrequencyGrid(double center_wavelength_nm, double span_nm, std::size_t n_points)
    : center_nm_(center_wavelength_nm), span_nm_(span_nm) {
  if (!(center_wavelength_nm > 0.0) || !std::isfinite(center_wavelength_nm)) {
    throw ConfigError("grid.center_wavelength_nm", "must be positive");
  }
  if (!(span_nm > 0.0) || !std::isfinite(span_nm)) {
    throw ConfigError("grid.span_nm", "must be positive");
  }
  if (span_nm / 2.0 >= center_wavelength_nm) {
    throw ConfigError("grid.span_nm", "window reaches zero wavelength");
  }
  if (n_points < 1) throw ConfigError("grid.n_points", "need at least one point");

  const double lam_lo = center_wavelength_nm - span_nm / 2.0;
  const double lam_hi = center_wavelength_nm + span_nm / 2.0;
  const double w_max = wavelength_nm_to_omega(lam_lo);
  const double w_min = wavelength_nm_to_omega(lam_hi);
  omegas_.resize(n_points);
  wavelengths_nm_.resize(n_points);
  if (n_points == 1) {
    // One bin at the centre, as wide as the window.
    bin_width_ = w_max - w_min;
    omegas_[0] = wavelength_nm_to_omega(center_wavelength_nm);
    wavelengths_nm_[0] = center_wavelength_nm;
    return;
  }
  bin_width_ = (w_max - w_min) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    omegas_[i] = w_max - static_cast<double>(i) * bin_width_;
    wavelengths_nm_[i] = omega_to_wavelength_nm(omegas_[i]);
  }
  omegas_.back() = w_min;
  wavelengths_nm_.front() = lam_lo;
  wavelengths_nm_.back() = lam_hi;
}

double FrequencyGrid::mean_wavelength_step_nm() const {
  if (size() < 2) return 0.0;
  return (wavelengths_nm_.back() - wavelengths_nm_.front()) / static_cast<double>(size() - 1);
}

std::vector<bool> FrequencyGrid::window_mask(double lo_nm, double hi_nm) const {
  std::vector<bool> mask(size());
  for (std::size_t i = 0; i < size(); ++i) {
    mask[i] = wavelengths_nm_[i] >= lo_nm && wavelengths_nm_[i] <= hi_nm;
  }
  return mask;
}

FrequencyGrid make_grid(double center_wavelength_nm, double span_nm, std::size_t n_points) {
  return FrequencyGrid(center_wavelength_nm, span_nm, n_points);
}

double PumpProfile::omega() const { return wavelength_nm_to_omega(center_wavelength_nm); }

double PumpProfile::spectral_sigma() const {
  // Transform-limited Gaussian: intensity FWHM tau in time gives an
  // amplitude sigma of 2 sqrt(ln 2) / tau in angular frequency.
  return 2.0 * std::sqrt(std::log(2.0)) / (pulse_duration_fwhm_ps * 1e-12);
}

cplx pump_envelope(const PumpProfile& pump, double omega_sum) {
  const double d = (omega_sum - pump.omega()) / pump.spectral_sigma();
  return {std::exp(-0.5 * d * d), 0.0};
}

namespace {

double fwhm_omega(double degenerate_nm, double fwhm_nm) {
  if (!(fwhm_nm > 0.0) || fwhm_nm / 2.0 >= degenerate_nm) {
    throw ConfigError("crystal.phase_matching.spectrum_fwhm_nm", "out of range");
  }
  return wavelength_nm_to_omega(degenerate_nm - fwhm_nm / 2.0) -
         wavelength_nm_to_omega(degenerate_nm + fwhm_nm / 2.0);
}

// sinc^2(x) = 1/2 at this x.
constexpr double kSincHalfPoint = 1.3915573782515103;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace

GaussianPhaseMatching gaussian_phase_matching_for_fwhm(double degenerate_nm, double fwhm_nm) {
  const double half = fwhm_omega(degenerate_nm, fwhm_nm) / 2.0;
  return {half / std::sqrt(std::log(2.0))};
}

QuadraticMismatch quadratic_mismatch_for_fwhm(double degenerate_nm, double fwhm_nm,
                                              double length_mm) {
  if (!(length_mm > 0.0)) throw ConfigError("crystal.length_mm", "must be positive");
  const double half = fwhm_omega(degenerate_nm, fwhm_nm) / 2.0;
  return {2.0 * kSincHalfPoint / (length_mm * 1e-3 * half * half)};
}

KernelModel::KernelModel(FrequencyGrid grid, PumpProfile pump, CrystalParams crystal)
    : grid_(std::move(grid)), pump_(pump), crystal_(std::move(crystal)) {
  if (!(crystal_.length_mm > 0.0)) throw ConfigError("crystal.length_mm", "must be positive");
  if (!(pump_.pulse_duration_fwhm_ps > 0.0)) {
    throw ConfigError("pump.pulse_duration_fwhm_ps", "must be positive");
  }
  const Index n = grid_.isize();
  amplitude_.resize(n, n);
  mismatch_ = RMatrix::Zero(n, n);
  const double dw = grid_.bin_width();
  const auto* gauss = std::get_if<GaussianPhaseMatching>(&crystal_.phase_matching);
  const auto* quad = std::get_if<QuadraticMismatch>(&crystal_.phase_matching);
  if (gauss && !(gauss->width > 0.0)) {
    throw ConfigError("crystal.phase_matching.width", "must be positive");
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double wi = grid_.omega(static_cast<std::size_t>(i));
      const double wj = grid_.omega(static_cast<std::size_t>(j));
      const double big_omega = 0.5 * (wi - wj);
      double phi = 1.0;
      if (gauss) {
        const double u = big_omega / gauss->width;
        phi = std::exp(-0.5 * u * u);
      } else {
        mismatch_(i, j) = mismatch_(j, i) = quad->curvature * big_omega * big_omega;
      }
      const cplx a = pump_envelope(pump_, wi + wj) * phi * dw;
      amplitude_(i, j) = a;
      amplitude_(j, i) = a;
    }
  }
}

CMatrix KernelModel::at(double z) const {
  const double s = crystal_.coupling_strength;
  if (z_independent()) return s * amplitude_;
  const double dz = z - 0.5 * length();
  CMatrix out(amplitude_.rows(), amplitude_.cols());
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) {
      const double ph = mismatch_(i, j) * dz;
      out(i, j) = s * amplitude_(i, j) * cplx(std::cos(ph), std::sin(ph));
    }
  }
  return out;
}

CMatrix KernelModel::integrated() const {
  const double s = crystal_.coupling_strength;
  const double L = length();
  if (z_independent()) return (s * L) * amplitude_;
  CMatrix out(amplitude_.rows(), amplitude_.cols());
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) {
      out(i, j) = s * L * amplitude_(i, j) * sinc(0.5 * mismatch_(i, j) * L);
    }
  }
  return out;
}

KernelModel KernelModel::with_coupling_strength(double strength) const {
  KernelModel out = *this;
  out.crystal_.coupling_strength = strength;
  return out;
}

CouplingKernel build_kernel(const FrequencyGrid& grid, const PumpProfile& pump,
                            const CrystalParams& crystal, double z) {
  if (!(z >= 0.0 && z <= crystal.length_m())) {
    throw InputError("build_kernel: z outside the crystal");
  }
  KernelModel model(grid, pump, crystal);
  return {grid, model.at(z), z};
}

}  // namespace mopa
