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

#include "mopa/detection_chain.hpp"

#include "mopa/errors.hpp"

namespace mopa {

GaussianState DetectionChain::squeezed() const {
  if (!(squeezer.grid == amplifier.grid)) {
    throw InputError("DetectionChain: squeezer and amplifier grids differ");
  }
  GaussianState s = apply_transfer(GaussianState::vacuum(grid()), squeezer);
  if (!pre_transmission.empty()) s = apply_loss(s, pre_transmission);
  return s;
}

GaussianState DetectionChain::detect(const GaussianState& amplifier_input) const {
  GaussianState s = apply_transfer(amplifier_input, amplifier);
  if (post_transmission != 1.0) s = apply_loss(s, post_transmission);
  if (filter_nm) s = apply_bandpass(s, filter_nm->first, filter_nm->second);
  return s;
}

GaussianState DetectionChain::output(double pump_phase) const {
  return detect(apply_phase(squeezed(), pump_phase));
}

GaussianState DetectionChain::vacuum_output() const {
  return detect(GaussianState::vacuum(grid()));
}

}  // namespace mopa
