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

#ifndef MOPA_RECONSTRUCTION_HPP
#define MOPA_RECONSTRUCTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "mopa/gaussian_state.hpp"
#include "mopa/linalg.hpp"
#include "mopa/mode_analysis.hpp"

namespace mopa {

// Coherent-mode decomposition of the first-order correlation
// G1 = sqrt(max(C, 0)) of a spectral covariance, G1 = sum_n w_n u_n u_n^T.
struct CoherentModes {
  RMatrix modes;     // N x K, unit norm, largest entry positive
  RVector weights;   // normalised over the positive eigenvalues
  RVector eigenvalues;
  double residual = 0.0;           // relative Frobenius error of the rebuilt C
  double negative_fraction = 0.0;  // |negative eigenvalues| / sum |eigenvalues|
  double noise_floor = 0.0;        // largest |negative eigenvalue| / largest eigenvalue
};

// Throws NumericalError when negative eigenvalues carry more than
// max_negative_fraction of the spectrum, InputError for a zero matrix.
// Sampled covariances (frames > 1) have elements below
// significance_threshold standard errors set to zero before the root.
CoherentModes coherent_modes(const SpectralCovariance& cov, double max_negative_fraction = 0.2,
                             double significance_threshold = 3.0);

// Photons per decomposition mode: I_n = w_n * sum_i <n_i>.
RVector modal_intensities(const CoherentModes& modes, const RVector& mean_spectrum);

// Greedy one-to-one pairing of decomposition modes with reference modes by
// largest |<u_k|ref_n>|. Entry k holds the reference index or -1.
std::vector<int> match_modes(const RMatrix& modes, const CMatrix& reference);
// Intensities re-indexed by reference mode; unmatched references get NaN.
RVector assign_intensities(const RVector& intensities, const std::vector<int>& match,
                           Index n_reference);

struct GainCalibration {
  RVector vacuum_intensity;  // I_n with the squeezer blocked
  std::vector<bool> retained;
  double noise_floor = 0.0;
};

// Retains amplifier modes whose vacuum intensity lies above the floor.
GainCalibration gain_calibration(const RVector& vacuum_intensity, double noise_floor);

struct ModeSqueezing {
  int mode = 0;  // 1-based squeezer mode label
  double dark_variance = 1.0;
  double bright_variance = 1.0;
  double squeezing_db = 0.0;
  double antisqueezing_db = 0.0;
  double squeezing_low_db = 0.0;
  double squeezing_high_db = 0.0;
  double antisqueezing_low_db = 0.0;
  double antisqueezing_high_db = 0.0;
  double statistical_uncertainty_db = 0.0;
  double coverage = 0.0;
  double truncation_bound = 0.0;
  std::optional<double> squeezing_axis;  // quadrature angle in [0, pi)
  std::vector<std::string> flags;
};

struct ExcludedMode {
  int mode = 0;
  std::string reason;
};

struct SqueezingReport {
  std::vector<ModeSqueezing> modes;
  std::vector<ExcludedMode> excluded;
  std::vector<std::string> warnings;
};

// Variance of squeezer mode l from amplified intensities,
// Var_l = sum_n g_ln^2 I_n / I_n^vac over retained amplifier modes.
// Modes with retained coverage below the threshold are excluded.
SqueezingReport reconstruct_squeezing(const RVector& dark_intensity, const RVector& bright_intensity,
                                      const OverlapMatrix& overlap, const GainCalibration& calibration,
                                      double coverage_threshold = 0.95);

// 10 log10 of a variance. Throws InputError for non-positive input.
double to_db(double variance);

// Quadrature angle of squeezer mode l implied by the dark fringe, using the
// Takagi phase of its best-overlapping amplifier mode.
double reconstructed_squeezing_axis(const OverlapMatrix& overlap, const ModeBasis& amplifier,
                                    Index l, double dark_phase);

}  // namespace mopa

#endif  // MOPA_RECONSTRUCTION_HPP
