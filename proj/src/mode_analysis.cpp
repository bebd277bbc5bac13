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

#include "mopa/mode_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "mopa/errors.hpp"
#include "mopa/profile.hpp"

namespace mopa {

CMatrix ModeBasis::reconstruct_v() const {
  const Index n = grid.isize();
  CMatrix v = CMatrix::Zero(n, n);
  for (Index k = 0; k < gains.size(); ++k) {
    const cplx c2 = takagi_phases(k) * takagi_phases(k);
    v += (std::sinh(gains(k)) * c2) * modes.col(k) * input_modes.col(k).transpose();
  }
  return v;
}

namespace {

std::vector<bool> degenerate_flags(const RVector& gains) {
  const Index k = gains.size();
  std::vector<bool> flags(static_cast<std::size_t>(k), false);
  for (Index i = 0; i + 1 < k; ++i) {
    const double tol = 1e-9 * std::max(1.0, gains(i));
    if (std::abs(gains(i) - gains(i + 1)) < tol) {
      flags[static_cast<std::size_t>(i)] = true;
      flags[static_cast<std::size_t>(i + 1)] = true;
    }
  }
  return flags;
}

}  // namespace

ModeBasis schmidt_modes(const TransferMatrices& transfer, std::size_t n_keep) {
  const Index n = transfer.grid.isize();
  if (transfer.V.rows() != n || transfer.V.cols() != n) {
    throw InputError("schmidt_modes: transfer matrices do not match grid");
  }
  ModeBasis out;
  out.grid = transfer.grid;
  Eigen::BDCSVD<CMatrix> svd(transfer.V, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  double total = 0.0;
  for (Index k = 0; k < s.size(); ++k) total += s(k) * s(k);

  Index keep = 0;
  const Index cap = std::min<Index>(static_cast<Index>(n_keep), n);
  while (keep < cap && s(keep) > 0.0 && s(keep) > 1e-14 * s(0)) ++keep;

  out.modes.resize(n, keep);
  out.input_modes.resize(n, keep);
  out.takagi_phases.resize(keep);
  out.gains.resize(keep);
  out.weights.resize(keep);
  double kept = 0.0;
  // The SVD mixes degenerate singular vectors freely, which can combine
  // modes squeezed along different axes. For a symmetric V such a block is
  // re-split by a Takagi factorisation of its restriction.
  CMatrix out_vecs = svd.matrixU().leftCols(keep);
  CMatrix in_vecs = svd.matrixV().leftCols(keep).conjugate();
  const double vscale = s.size() ? std::max(1.0, s(0)) : 1.0;
  const bool symmetric = asymmetry(transfer.V) <= 1e-8 * vscale;
  for (Index start = 0; start < keep;) {
    Index end = start + 1;
    while (end < keep && std::abs(s(end) - s(start)) < 1e-9 * std::max(1.0, s(start))) ++end;
    const Index d = end - start;
    if (d > 1 && symmetric) {
      const CMatrix ub = out_vecs.middleCols(start, d);
      const CMatrix a = ub.adjoint() * transfer.V * ub.conjugate() / s(start);
      const Takagi t = takagi_factor(0.5 * (a + a.transpose()), 1e-6);
      out_vecs.middleCols(start, d) = ub * t.vectors;
      in_vecs.middleCols(start, d) = out_vecs.middleCols(start, d);
    } else {
      for (Index k = start; k < end; ++k) {
        // Align the pair so that <w|y> is real and positive; for a symmetric
        // V this makes the input mode equal to the output mode.
        const cplx ov = out_vecs.col(k).dot(in_vecs.col(k));
        if (std::abs(ov) > 1e-12) {
          const cplx half = std::sqrt(ov / std::abs(ov));
          out_vecs.col(k) *= half;
          in_vecs.col(k) /= half;
        }
      }
    }
    start = end;
  }
  for (Index k = 0; k < keep; ++k) {
    CVector w = out_vecs.col(k);
    const CVector y = in_vecs.col(k);
    const cplx c = fix_gauge(w);
    out.modes.col(k) = w;
    out.input_modes.col(k) = y / c;
    out.takagi_phases(k) = c;
    out.gains(k) = std::asinh(s(k));
    out.weights(k) = total > 0.0 ? s(k) * s(k) / total : 0.0;
    kept += out.weights(k);
  }
  out.discarded_weight = keep > 0 ? std::max(0.0, 1.0 - kept) : 0.0;
  out.gauge_ambiguous = degenerate_flags(out.gains);
  return out;
}

ModeBasis truncate(const ModeBasis& basis, double cumulative_weight, std::size_t max_modes) {
  if (!(cumulative_weight > 0.0 && cumulative_weight <= 1.0)) {
    throw InputError("truncate: cumulative weight must lie in (0, 1]");
  }
  const Index total = basis.gains.size();
  Index keep = 0;
  double acc = 0.0;
  while (keep < total && keep < static_cast<Index>(max_modes) && acc < cumulative_weight) {
    acc += basis.weights(keep);
    ++keep;
  }
  ModeBasis out;
  out.grid = basis.grid;
  out.modes = basis.modes.leftCols(keep);
  out.input_modes = basis.input_modes.leftCols(keep);
  out.takagi_phases = basis.takagi_phases.head(keep);
  out.gains = basis.gains.head(keep);
  out.weights = basis.weights.head(keep);
  out.discarded_weight = std::max(0.0, 1.0 - out.weights.sum());
  out.gauge_ambiguous.assign(basis.gauge_ambiguous.begin(),
                             basis.gauge_ambiguous.begin() + keep);
  return out;
}

double schmidt_number(std::span<const double> weights) {
  if (weights.empty()) throw InputError("schmidt_number: no weights");
  double sum = 0.0, sq = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw InputError("schmidt_number: negative weight");
    sum += w;
    sq += w * w;
  }
  if (!(sum > 0.0)) throw InputError("schmidt_number: weights sum to zero");
  return sum * sum / sq;
}

double schmidt_number(const ModeBasis& basis) {
  return schmidt_number(std::span<const double>(basis.weights.data(), basis.weights.size()));
}

OverlapMatrix overlap_matrix(const ModeBasis& squeezer, const ModeBasis& amplifier) {
  if (!(squeezer.grid == amplifier.grid)) {
    throw InputError("overlap_matrix: mode bases live on different grids");
  }
  CMatrix y = amplifier.input_modes;
  const Index rows = squeezer.modes.cols();
  const Index cols = y.cols();

  // Inside a degenerate amplifier block the modes are only defined up to a
  // unitary; pick the rotation that makes the block diagonal dominant.
  for (Index start = 0; start < cols;) {
    Index end = start + 1;
    if (amplifier.gauge_ambiguous[static_cast<std::size_t>(start)]) {
      while (end < cols && amplifier.gauge_ambiguous[static_cast<std::size_t>(end)] &&
             std::abs(amplifier.gains(end) - amplifier.gains(start)) <
                 1e-9 * std::max(1.0, amplifier.gains(start))) {
        ++end;
      }
    }
    const Index len = end - start;
    if (len > 1 && end <= rows) {
      CMatrix sub = squeezer.modes.middleCols(start, len).adjoint() * y.middleCols(start, len);
      Eigen::JacobiSVD<CMatrix> svd(sub, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const CMatrix rot = svd.matrixV() * svd.matrixU().adjoint();
      y.middleCols(start, len) = y.middleCols(start, len) * rot;
    }
    start = end;
  }

  CMatrix o = squeezer.modes.adjoint() * y;
  const cplx sum_sq = o.array().square().sum();
  double chi = std::abs(sum_sq) > 0.0 ? -0.5 * std::arg(sum_sq) : 0.0;
  o *= std::polar(1.0, chi);

  OverlapMatrix out;
  out.g = o.real();
  // Choose the sign of the overall phase that makes the leading overlap positive.
  if (rows > 0 && cols > 0 && out.g(0, 0) < 0.0) {
    out.g = -out.g;
    o = -o;
    chi += kPi;
  }
  out.global_phase = chi;
  const double norm = o.norm();
  out.imaginary_residue = norm > 0.0 ? o.imag().norm() / norm : 0.0;
  for (Index l = 0; l < rows; ++l) out.row_labels.push_back(static_cast<int>(l) + 1);
  for (Index n = 0; n < cols; ++n) out.col_labels.push_back(static_cast<int>(n) + 1);
  if (out.imaginary_residue > 0.01) {
    out.warning = fmt::format("overlap matrix is not real after phase alignment (residue {:.3f})",
                              out.imaginary_residue);
  }
  return out;
}

FwhmResult mode_fwhm(const CVector& mode, const FrequencyGrid& grid) {
  if (mode.size() != grid.isize()) throw InputError("mode_fwhm: mode does not match grid");
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) y[i] = std::norm(mode(static_cast<Index>(i)));
  return fwhm(grid.wavelengths_nm(), y);
}

}  // namespace mopa
