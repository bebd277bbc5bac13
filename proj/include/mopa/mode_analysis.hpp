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

#ifndef MOPA_MODE_ANALYSIS_HPP
#define MOPA_MODE_ANALYSIS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mopa/bogoliubov.hpp"
#include "mopa/linalg.hpp"
#include "mopa/pdc_kernel.hpp"

namespace mopa {

// Broadband modes of one device, ordered by gain. Stored modes have their
// largest-magnitude entry real and positive; takagi_phases(n) restores the
// phase that makes V = sum_n sinh(r_n) t_n y_n^T with t_n = c_n * mode_n
// and y_n = c_n * input_mode_n.
struct ModeBasis {
  FrequencyGrid grid;
  CMatrix modes;        // N x K, output side
  CMatrix input_modes;  // N x K, input side
  CVector takagi_phases;
  RVector gains;    // r_n, descending
  RVector weights;  // sinh^2 r_n / sum over all modes
  double discarded_weight = 0.0;
  std::vector<bool> gauge_ambiguous;

  std::size_t size() const { return static_cast<std::size_t>(gains.size()); }
  CMatrix reconstruct_v() const;
};

// Decomposes V into at most n_keep modes. Zero-gain directions are dropped,
// so the vacuum map gives an empty basis.
ModeBasis schmidt_modes(const TransferMatrices& transfer, std::size_t n_keep);
// Smallest prefix whose cumulative weight reaches the given fraction.
ModeBasis truncate(const ModeBasis& basis, double cumulative_weight, std::size_t max_modes);
// K = 1 / sum w_n^2 over normalised weights.
double schmidt_number(std::span<const double> weights);
double schmidt_number(const ModeBasis& basis);

// Real overlaps g_ln between squeezer output modes (rows) and amplifier
// input modes (columns), after one global phase alignment.
struct OverlapMatrix {
  RMatrix g;
  std::vector<int> row_labels;
  std::vector<int> col_labels;
  double global_phase = 0.0;
  double imaginary_residue = 0.0;  // ||Im|| / ||.|| after alignment
  std::optional<std::string> warning;

  RVector row_coverage() const { return g.array().square().rowwise().sum(); }
  RVector column_coverage() const { return g.array().square().colwise().sum(); }
};

// Throws InputError when the bases live on different grids.
OverlapMatrix overlap_matrix(const ModeBasis& squeezer, const ModeBasis& amplifier);

struct FwhmResult {
  double width = 0.0;
  bool multi_peak = false;
};

// FWHM of |u|^2 over wavelength, in nm.
FwhmResult mode_fwhm(const CVector& mode, const FrequencyGrid& grid);

}  // namespace mopa

#endif  // MOPA_MODE_ANALYSIS_HPP
