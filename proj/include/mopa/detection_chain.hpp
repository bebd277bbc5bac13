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

#ifndef MOPA_DETECTION_CHAIN_HPP
#define MOPA_DETECTION_CHAIN_HPP

#include <optional>
#include <utility>
#include <vector>

#include "mopa/bogoliubov.hpp"
#include "mopa/gaussian_state.hpp"

namespace mopa {

// vacuum -> squeezer -> loss -> pump phase -> amplifier -> loss -> filter.
struct DetectionChain {
  TransferMatrices squeezer;
  TransferMatrices amplifier;
  std::vector<double> pre_transmission;  // per bin; empty means lossless
  double post_transmission = 1.0;
  std::optional<std::pair<double, double>> filter_nm;

  const FrequencyGrid& grid() const { return squeezer.grid; }
  // State entering the amplifier at zero pump phase.
  GaussianState squeezed() const;
  // Amplifier, post-amplifier loss and filter applied to an input state.
  GaussianState detect(const GaussianState& amplifier_input) const;
  GaussianState output(double pump_phase) const;
  // Amplifier output with the squeezer arm blocked.
  GaussianState vacuum_output() const;
};

}  // namespace mopa

#endif  // MOPA_DETECTION_CHAIN_HPP
