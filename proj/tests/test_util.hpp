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


#pragma once

#include <cstdint>
#include <random>

#include "mopa/bogoliubov.hpp"
#include "mopa/linalg.hpp"
#include "mopa/pdc_kernel.hpp"

namespace mopa::testing {

inline KernelModel gaussian_model(std::size_t n, double strength, double span_nm = 8.0,
                                  double fwhm_nm = 37.0) {
  CrystalParams c;
  c.length_mm = 3.0;
  c.phase_matching = gaussian_phase_matching_for_fwhm(709.34, fwhm_nm);
  c.coupling_strength = strength;
  return KernelModel(make_grid(709.34, span_nm, n), PumpProfile{}, c);
}

inline KernelModel quadratic_model(std::size_t n, double strength, double span_nm = 8.0,
                                   double fwhm_nm = 37.0) {
  CrystalParams c;
  c.length_mm = 3.0;
  c.phase_matching = quadratic_mismatch_for_fwhm(709.34, fwhm_nm, c.length_mm);
  c.coupling_strength = strength;
  return KernelModel(make_grid(709.34, span_nm, n), PumpProfile{}, c);
}

// Model rescaled so that its fundamental gain equals r.
inline KernelModel at_gain(const KernelModel& m, double r, int n_steps = 200) {
  CalibrationOptions o;
  o.propagation.n_steps = n_steps;
  return m.with_coupling_strength(calibrate_gain(r, m, o));
}

inline CMatrix random_symmetric(Index n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  CMatrix a(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) a(i, j) = cplx(d(rng), d(rng));
  }
  return 0.5 * (a + a.transpose()).eval();
}

inline CMatrix random_unitary(Index n, std::uint64_t seed) {
  Eigen::HouseholderQR<CMatrix> qr(random_symmetric(n, seed) + CMatrix::Identity(n, n));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace mopa::testing
