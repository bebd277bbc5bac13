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

#ifndef MOPA_MEASUREMENT_HPP
#define MOPA_MEASUREMENT_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mopa/detection_chain.hpp"
#include "mopa/gaussian_state.hpp"

namespace mopa {

// Spectrometer camera. Quantum efficiency acts as a loss on the field;
// read noise and dark level act on the recorded counts.
struct CameraModel {
  double quantum_efficiency = 1.0;
  double read_noise_rms = 0.0;  // photons per bin per frame
  double dark_level = 0.0;
  bool clamp_negative = false;

  bool ideal() const {
    return quantum_efficiency == 1.0 && read_noise_rms == 0.0 && dark_level == 0.0 && !clamp_negative;
  }
};

// One spectrum per row, dark-subtracted, in photons per bin.
struct FrameStack {
  FrequencyGrid grid;
  RMatrix frames;
  std::uint64_t seed = 0;

  std::size_t count() const { return static_cast<std::size_t>(frames.rows()); }
};

// Draws frames from the Wigner distribution, I = (x^2 + p^2) / 4 - 1/2.
// Frame k always uses the same random stream, so the result does not
// depend on the thread count.
FrameStack sample_frames(const GaussianState& state, std::size_t n_frames, std::uint64_t seed,
                         const CameraModel& camera = {}, unsigned threads = 1);

// Unbiased sample covariance. Throws InputError for fewer than two frames.
SpectralCovariance estimate_covariance(const FrameStack& stack);
// Standard error of every covariance entry.
RMatrix covariance_standard_errors(const FrameStack& stack);

// value = offset + amplitude * cos(phi - phase).
struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double residual_rms = 0.0;

  double operator()(double phi) const;
};

// Linear least squares on {1, cos, sin}. Needs three or more samples.
SinusoidFit fit_sinusoid(const std::vector<double>& phases, const std::vector<double>& values);

struct PsaTrace {
  std::vector<double> phases;
  std::vector<double> photons;     // total detected photons
  std::vector<double> normalized;  // relative to the blocked-squeezer level
  double vacuum_photons = 0.0;
};

PsaTrace psa_trace(const DetectionChain& chain, const std::vector<double>& phases);

struct Fringes {
  double bright_phase = 0.0;
  double dark_phase = 0.0;
  SinusoidFit fit;
  std::vector<std::string> warnings;
};

// Throws InputError when the trace spans less than one period.
Fringes find_fringes(const PsaTrace& trace);

struct CovarianceWidths {
  double unconditional_nm = 0.0;  // FWHM of the covariance diagonal
  double conditional_pm = 0.0;    // FWHM across the anti-diagonal through the peak
  Index peak_bin = 0;
  bool multi_peak = false;
};

// Throws InputError when the diagonal has no positive entry.
CovarianceWidths covariance_widths(const SpectralCovariance& cov);

}  // namespace mopa

#endif  // MOPA_MEASUREMENT_HPP
