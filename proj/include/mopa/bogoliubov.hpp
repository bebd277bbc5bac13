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

#ifndef MOPA_BOGOLIUBOV_HPP
#define MOPA_BOGOLIUBOV_HPP

#include <functional>
#include <vector>

#include "mopa/linalg.hpp"
#include "mopa/pdc_kernel.hpp"

namespace mopa {

// a_out = U a_in + V a_in^dagger.
struct BogoliubovPair {
  CMatrix U;
  CMatrix V;
};

// max |U U^+ - V V^+ - I| and max |U V^T - V U^T|.
double symplectic_defect(const CMatrix& U, const CMatrix& V);
double symmetry_defect(const CMatrix& U, const CMatrix& V);

struct TransferMatrices {
  FrequencyGrid grid;
  CMatrix U;
  CMatrix V;

  static TransferMatrices identity(const FrequencyGrid& grid);
  double symplectic_defect() const { return mopa::symplectic_defect(U, V); }
  double symmetry_defect() const { return mopa::symmetry_defect(U, V); }
  // The inverse map is (U^+, -V^T).
  TransferMatrices inverse() const;
  // Composition: apply this device first, then `next`.
  TransferMatrices then(const TransferMatrices& next) const;
};

struct PropagationOptions {
  int n_steps = 200;
  int checkpoint_every = 0;  // 0 picks n_steps / 20
  double invariant_tolerance = 1e-6;
};

struct PropagationDiagnostics {
  double max_symplectic_defect = 0.0;
  double max_symmetry_defect = 0.0;
  int checkpoints = 0;
};

using KernelFunction = std::function<CMatrix(double)>;

// RK4 on dU/dz = K V*, dV/dz = K U* from (I, 0). Throws NumericalError
// when an invariant drifts past the tolerance at a checkpoint.
BogoliubovPair propagate(const KernelFunction& kernel, Index dim, double length,
                         const PropagationOptions& options = {},
                         PropagationDiagnostics* diagnostics = nullptr);
TransferMatrices propagate(const KernelModel& model, const PropagationOptions& options = {},
                           PropagationDiagnostics* diagnostics = nullptr);

// First-order Magnus map for an integrated kernel J = W diag(r) W^T:
// U = W cosh(r) W^+, V = W sinh(r) W^T. Exact for z-independent kernels.
BogoliubovPair magnus1_pair(const CMatrix& J);
TransferMatrices magnus1_transfer(const FrequencyGrid& grid, const CMatrix& J);

// Magnus for z-independent models, RK4 otherwise.
TransferMatrices compute_transfer(const KernelModel& model, const PropagationOptions& options = {});

// r_1 = arcsinh(sigma_max(V)).
double fundamental_gain(const CMatrix& V);
double fundamental_gain(const TransferMatrices& t);

struct CalibrationOptions {
  PropagationOptions propagation;
  double gain_tolerance = 1e-6;
  double max_bracket_factor = 1e3;
  int max_iterations = 200;
};

// Coupling strength for which compute_transfer reaches r_1 = target_gain.
// Throws CalibrationError when no bracket exists within the bounds.
double calibrate_gain(double target_gain, const KernelModel& model,
                      const CalibrationOptions& options = {});

}  // namespace mopa

#endif  // MOPA_BOGOLIUBOV_HPP
