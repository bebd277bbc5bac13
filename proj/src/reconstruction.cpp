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

#include "mopa/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "mopa/errors.hpp"

namespace mopa {

CoherentModes coherent_modes(const SpectralCovariance& cov, double max_negative_fraction,
                             double significance_threshold) {
  const Index n = cov.matrix.rows();
  if (n == 0 || cov.matrix.cols() != n) throw InputError("coherent_modes: bad covariance");
  const double scale = cov.matrix.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw InputError("coherent_modes: covariance is zero");

  RMatrix c = cov.matrix.cwiseMax(0.0);
  if (cov.frames > 1 && significance_threshold > 0.0) {
    // The square root lifts sampling noise on near-zero elements to
    // sqrt(noise); drop elements that are not significant.
    const double f = static_cast<double>(cov.frames - 1);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        const double se = std::sqrt((cov.matrix(i, i) * cov.matrix(j, j) + c(i, j) * c(i, j)) / f);
        if (c(i, j) < significance_threshold * se) c(i, j) = 0.0;
      }
    }
  }
  RMatrix g1 = c.cwiseSqrt();
  g1 = 0.5 * (g1 + g1.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(g1);
  if (es.info() != Eigen::Success) throw NumericalError("coherent_modes: eigensolver failed");

  CoherentModes out;
  out.eigenvalues = es.eigenvalues().reverse();
  const RMatrix vecs = es.eigenvectors().rowwise().reverse();
  double pos = 0.0, neg = 0.0, most_negative = 0.0;
  Index k_pos = 0;
  for (Index k = 0; k < n; ++k) {
    const double e = out.eigenvalues(k);
    if (e > 0.0) {
      pos += e;
      ++k_pos;
    } else {
      neg -= e;
      most_negative = std::max(most_negative, -e);
    }
  }
  if (!(pos > 0.0)) throw NumericalError("coherent_modes: no positive eigenvalue");
  out.negative_fraction = neg / (pos + neg);
  if (out.negative_fraction > max_negative_fraction) {
    throw NumericalError(fmt::format(
        "coherent_modes: negative eigenvalues carry {:.1f}% of the spectrum", 100.0 * out.negative_fraction));
  }
  out.noise_floor = most_negative / out.eigenvalues(0);
  out.modes = vecs.leftCols(k_pos);
  out.weights = out.eigenvalues.head(k_pos) / pos;
  for (Index k = 0; k < k_pos; ++k) {
    Index imax = 0;
    out.modes.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.modes(imax, k) < 0.0) out.modes.col(k) *= -1.0;
  }
  const RMatrix rebuilt = (out.modes * out.eigenvalues.head(k_pos).asDiagonal() *
                           out.modes.transpose()).cwiseAbs2();
  out.residual = (rebuilt - cov.matrix).norm() / cov.matrix.norm();
  return out;
}

RVector modal_intensities(const CoherentModes& modes, const RVector& mean_spectrum) {
  return modes.weights * mean_spectrum.sum();
}

std::vector<int> match_modes(const RMatrix& modes, const CMatrix& reference) {
  if (modes.rows() != reference.rows()) throw InputError("match_modes: grid mismatch");
  const Index k = modes.cols();
  const Index m = reference.cols();
  const RMatrix score = (reference.adjoint() * modes.cast<cplx>()).cwiseAbs().transpose();
  std::vector<int> match(static_cast<std::size_t>(k), -1);
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  // Decomposition modes arrive in descending weight; earlier ones pick first.
  for (Index i = 0; i < k; ++i) {
    double best = -1.0;
    Index arg = -1;
    for (Index j = 0; j < m; ++j) {
      if (!used[static_cast<std::size_t>(j)] && score(i, j) > best) {
        best = score(i, j);
        arg = j;
      }
    }
    if (arg >= 0) {
      match[static_cast<std::size_t>(i)] = static_cast<int>(arg);
      used[static_cast<std::size_t>(arg)] = true;
    }
  }
  return match;
}

RVector assign_intensities(const RVector& intensities, const std::vector<int>& match,
                           Index n_reference) {
  if (static_cast<Index>(match.size()) != intensities.size()) {
    throw InputError("assign_intensities: size mismatch");
  }
  RVector out = RVector::Constant(n_reference, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < match.size(); ++k) {
    if (match[k] >= 0 && match[k] < n_reference) out(match[k]) = intensities(static_cast<Index>(k));
  }
  return out;
}

GainCalibration gain_calibration(const RVector& vacuum_intensity, double noise_floor) {
  if (noise_floor < 0.0) throw InputError("gain_calibration: negative noise floor");
  GainCalibration out;
  out.vacuum_intensity = vacuum_intensity;
  out.noise_floor = noise_floor;
  out.retained.resize(static_cast<std::size_t>(vacuum_intensity.size()));
  for (Index n = 0; n < vacuum_intensity.size(); ++n) {
    out.retained[static_cast<std::size_t>(n)] = vacuum_intensity(n) > noise_floor;
  }
  return out;
}

double to_db(double variance) {
  if (!(variance > 0.0)) throw InputError("to_db: variance must be positive");
  return 10.0 * std::log10(variance);
}

SqueezingReport reconstruct_squeezing(const RVector& dark_intensity, const RVector& bright_intensity,
                                      const OverlapMatrix& overlap, const GainCalibration& calibration,
                                      double coverage_threshold) {
  const Index rows = overlap.g.rows();
  const Index cols = overlap.g.cols();
  if (dark_intensity.size() != cols || bright_intensity.size() != cols ||
      calibration.vacuum_intensity.size() != cols) {
    throw InputError("reconstruct_squeezing: intensities do not match the overlap matrix");
  }
  SqueezingReport report;
  if (overlap.warning) report.warnings.push_back(*overlap.warning);
  for (Index l = 0; l < rows; ++l) {
    const int label = l < static_cast<Index>(overlap.row_labels.size())
                          ? overlap.row_labels[static_cast<std::size_t>(l)]
                          : static_cast<int>(l) + 1;
    double coverage = 0.0, dark = 0.0, bright = 0.0, unmatched = 0.0;
    for (Index n = 0; n < cols; ++n) {
      if (!calibration.retained[static_cast<std::size_t>(n)]) continue;
      const double g2 = overlap.g(l, n) * overlap.g(l, n);
      if (std::isnan(dark_intensity(n)) || std::isnan(bright_intensity(n))) {
        unmatched += g2;
        continue;
      }
      const double vac = calibration.vacuum_intensity(n);
      coverage += g2;
      dark += g2 * dark_intensity(n) / vac;
      bright += g2 * bright_intensity(n) / vac;
    }
    if (coverage < coverage_threshold) {
      std::string reason =
          fmt::format("insufficient overlap coverage ({:.3f} < {:.2f})", coverage, coverage_threshold);
      if (unmatched > 1e-3) reason += fmt::format("; {:.3f} unmatched in a decomposition", unmatched);
      report.excluded.push_back({label, std::move(reason)});
      continue;
    }
    if (!(dark > 0.0) || !(bright > 0.0)) {
      report.excluded.push_back({label, "non-positive reconstructed variance"});
      continue;
    }
    ModeSqueezing m;
    m.mode = label;
    m.coverage = coverage;
    m.truncation_bound = std::max(0.0, 1.0 - coverage);
    m.dark_variance = dark;
    m.bright_variance = bright;
    m.squeezing_db = to_db(dark);
    m.antisqueezing_db = to_db(bright);
    m.squeezing_low_db = m.squeezing_high_db = m.squeezing_db;
    m.antisqueezing_low_db = m.antisqueezing_high_db = m.antisqueezing_db;
    if (m.squeezing_db > m.antisqueezing_db) m.flags.push_back("squeezing exceeds antisqueezing");
    if (dark * bright < 1.0 - 1e-6) m.flags.push_back("variance product below the vacuum bound");
    if (unmatched > 1e-3) {
      m.flags.push_back(fmt::format("{:.3f} of the overlap weight is unmatched in a decomposition", unmatched));
    }
    report.modes.push_back(std::move(m));
  }
  return report;
}

double reconstructed_squeezing_axis(const OverlapMatrix& overlap, const ModeBasis& amplifier,
                                    Index l, double dark_phase) {
  if (l < 0 || l >= overlap.g.rows()) throw InputError("squeezing axis: mode out of range");
  Index best = 0;
  overlap.g.row(l).cwiseAbs().maxCoeff(&best);
  double theta = std::arg(amplifier.takagi_phases(best)) - 0.5 * dark_phase;
  theta = std::fmod(theta, kPi);
  if (theta < 0.0) theta += kPi;
  if (theta >= kPi - 1e-12) theta = 0.0;
  return theta + 0.0;
}

}  // namespace mopa
