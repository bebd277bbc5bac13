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

#ifndef MOPA_PROFILE_HPP
#define MOPA_PROFILE_HPP

#include <span>

#include "mopa/mode_analysis.hpp"

namespace mopa {

// Width at half maximum of y(x) between the outermost half-maximum
// crossings, linearly interpolated. multi_peak is set when the profile
// dips below half maximum between them. Throws InputError when all values
// are non-positive or sizes differ.
FwhmResult fwhm(std::span<const double> x, std::span<const double> y);

}  // namespace mopa

#endif  // MOPA_PROFILE_HPP
