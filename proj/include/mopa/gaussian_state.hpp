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

#ifndef MOPA_GAUSSIAN_STATE_HPP
#define MOPA_GAUSSIAN_STATE_HPP

#include <span>

#include "mopa/bogoliubov.hpp"
#include "mopa/linalg.hpp"
#include "mopa/pdc_kernel.hpp"

namespace mopa {

// N_ij = <a_i^+ a_j>, M_ij = <a_i a_j>.
struct SecondMoments {
  CMatrix normal;
  CMatrix anomalous;
};

// Zero-mean Gaussian state over the grid bins, described by its 2N x 2N
// quadrature covariance in the ordering (x_1..x_N, p_1..p_N), with
// x = a + a^+ and p = -i (a - a^+), so vacuum is the identity.
class GaussianState {
 public:
  GaussianState() = default;
  // Throws InputError on a non-square, mis-sized or asymmetric matrix.
  GaussianState(FrequencyGrid grid, RMatrix sigma);

  static GaussianState vacuum(const FrequencyGrid& grid);
  static GaussianState from_moments(const FrequencyGrid& grid, const SecondMoments& m);

  const FrequencyGrid& grid() const { return grid_; }
  const RMatrix& sigma() const { return sigma_; }
  Index modes() const { return grid_.isize(); }
  SecondMoments moments() const;
  // Smallest eigenvalue of sigma + i Omega; non-negative for physical states.
  double min_uncertainty_eigenvalue() const;

 private:
  FrequencyGrid grid_;
  RMatrix sigma_;
};

// Real symplectic form of (U, V) acting on (x, p).
RMatrix symplectic_matrix(const CMatrix& U, const CMatrix& V);

// Throws InputError when the map breaks the symplectic identities by more
// than 1e-6.
GaussianState apply_transfer(const GaussianState& state, const TransferMatrices& transfer);
// Beam splitter to vacuum with per-bin intensity transmission.
GaussianState apply_loss(const GaussianState& state, std::span<const double> transmission);
GaussianState apply_loss(const GaussianState& state, double transmission);
// Rotation a -> exp(i phase / 2) a, the effect of shifting the pump phase.
GaussianState apply_phase(const GaussianState& state, double pump_phase);
// Hard spectral window; bins outside [lo, hi] are replaced by vacuum.
GaussianState apply_bandpass(const GaussianState& state, double lo_nm, double hi_nm);
// The measured half of each pair: keeps N and drops the pair correlation M.
GaussianState signal_marginal(const GaussianState& state);

// Mean photon number per bin.
RVector mean_spectrum(const GaussianState& state);

enum class ShotTerm { excluded, included };

struct SpectralCovariance {
  FrequencyGrid grid;
  RMatrix matrix;
  RVector mean;
  std::size_t frames = 0;  // 0 for an analytic covariance
};

// cov(n_i, n_j) = |N_ij|^2 + |M_ij|^2 (+ delta_ij N_ii).
SpectralCovariance intensity_covariance_analytic(const GaussianState& state,
                                                 ShotTerm shot = ShotTerm::included);

// Variance of x_theta = f^* . a e^{-i theta} + h.c. for a unit-norm mode f,
// where theta is the quadrature angle (pump phase phi maps to theta = phi/2).
// Vacuum gives 1. Throws InputError when |f| differs from 1 by over 1e-9.
double quadrature_variance_in_mode(const GaussianState& state, const CVector& f,
                                   double quadrature_angle);
double quadrature_variance_in_mode(const SecondMoments& m, const CVector& f,
                                   double quadrature_angle);

// Angle in [0, pi) that minimises the variance, and the extreme variances.
struct ModeQuadrature {
  double squeezing_angle = 0.0;
  double min_variance = 1.0;
  double max_variance = 1.0;
};
ModeQuadrature mode_quadrature(const SecondMoments& m, const CVector& f);

}  // namespace mopa

#endif  // MOPA_GAUSSIAN_STATE_HPP
