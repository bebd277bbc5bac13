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

#include "mopa/profile.hpp"

#include <algorithm>
#include <cmath>

#include "mopa/errors.hpp"

namespace mopa {

FwhmResult fwhm(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("fwhm: size mismatch");
  if (y.empty()) throw InputError("fwhm: empty profile");
  const auto peak_it = std::max_element(y.begin(), y.end());
  const double peak = *peak_it;
  if (!(peak > 0.0)) throw InputError("fwhm: profile has no positive maximum");
  const double half = 0.5 * peak;
  const std::size_t n = y.size();

  std::size_t first = 0;
  while (y[first] < half) ++first;
  std::size_t last = n - 1;
  while (y[last] < half) --last;

  // A profile still above half maximum at the grid edge is cut half a step out.
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double t = (y[inside] - half) / (y[inside] - y[outside]);
    return x[inside] + t * (x[outside] - x[inside]);
  };
  double left, right;
  if (first > 0) {
    left = crossing(first, first - 1);
  } else {
    left = n > 1 ? x[0] - 0.5 * (x[1] - x[0]) : x[0];
  }
  if (last + 1 < n) {
    right = crossing(last, last + 1);
  } else {
    right = n > 1 ? x[n - 1] + 0.5 * (x[n - 1] - x[n - 2]) : x[0];
  }

  FwhmResult out;
  out.width = std::abs(right - left);
  for (std::size_t i = first; i <= last; ++i) {
    if (y[i] < half) {
      out.multi_peak = true;
      break;
    }
  }
  return out;
}

}  // namespace mopa
