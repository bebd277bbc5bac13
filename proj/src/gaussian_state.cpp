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

#include "mopa/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mopa/errors.hpp"

namespace mopa {

GaussianState::GaussianState(FrequencyGrid grid, RMatrix sigma)
    : grid_(std::move(grid)), sigma_(std::move(sigma)) {
  const Index n2 = 2 * grid_.isize();
  if (sigma_.rows() != n2 || sigma_.cols() != n2) {
    throw InputError("GaussianState: covariance does not match the grid");
  }
  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  if (asymmetry(sigma_) > 1e-10 * scale) {
    throw InputError("GaussianState: covariance is not symmetric");
  }
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
}

GaussianState GaussianState::vacuum(const FrequencyGrid& grid) {
  const Index n2 = 2 * grid.isize();
  return GaussianState(grid, RMatrix::Identity(n2, n2));
}

GaussianState GaussianState::from_moments(const FrequencyGrid& grid, const SecondMoments& m) {
  const Index n = grid.isize();
  if (m.normal.rows() != n || m.anomalous.rows() != n) {
    throw InputError("from_moments: moments do not match the grid");
  }
  const CMatrix plus = m.normal + m.anomalous;
  const CMatrix minus = m.normal - m.anomalous;
  RMatrix sigma(2 * n, 2 * n);
  const RMatrix id = RMatrix::Identity(n, n);
  const RMatrix xp = 2.0 * plus.imag();
  sigma.topLeftCorner(n, n) = 2.0 * plus.real() + id;
  sigma.bottomRightCorner(n, n) = 2.0 * minus.real() + id;
  sigma.topRightCorner(n, n) = xp;
  sigma.bottomLeftCorner(n, n) = xp.transpose();
  return GaussianState(grid, 0.5 * (sigma + sigma.transpose()));
}

SecondMoments GaussianState::moments() const {
  const Index n = modes();
  const auto xx = sigma_.topLeftCorner(n, n);
  const auto pp = sigma_.bottomRightCorner(n, n);
  const auto xp = sigma_.topRightCorner(n, n);
  const RMatrix id = RMatrix::Identity(n, n);
  SecondMoments m;
  m.normal = (0.25 * (xx + pp - 2.0 * id)).cast<cplx>() +
             cplx(0.0, 0.25) * (xp - xp.transpose()).cast<cplx>();
  m.anomalous = (0.25 * (xx - pp)).cast<cplx>() + cplx(0.0, 0.25) * (xp + xp.transpose()).cast<cplx>();
  return m;
}

double GaussianState::min_uncertainty_eigenvalue() const {
  const Index n = modes();
  CMatrix h = sigma_.cast<cplx>();
  h.topRightCorner(n, n) += cplx(0.0, 1.0) * CMatrix::Identity(n, n);
  h.bottomLeftCorner(n, n) -= cplx(0.0, 1.0) * CMatrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

RMatrix symplectic_matrix(const CMatrix& U, const CMatrix& V) {
  const Index n = U.rows();
  const CMatrix sum = U + V;
  const CMatrix diff = U - V;
  RMatrix s(2 * n, 2 * n);
  s.topLeftCorner(n, n) = sum.real();
  s.topRightCorner(n, n) = -diff.imag();
  s.bottomLeftCorner(n, n) = sum.imag();
  s.bottomRightCorner(n, n) = diff.real();
  return s;
}

GaussianState apply_transfer(const GaussianState& state, const TransferMatrices& transfer) {
  if (!(transfer.grid == state.grid())) throw InputError("apply_transfer: grid mismatch");
  const double defect = std::max(transfer.symplectic_defect(), transfer.symmetry_defect());
  if (!(defect <= 1e-6)) throw InputError("apply_transfer: map is not symplectic");
  const RMatrix s = symplectic_matrix(transfer.U, transfer.V);
  RMatrix out = s * state.sigma() * s.transpose();
  return GaussianState(state.grid(), 0.5 * (out + out.transpose()));
}

GaussianState apply_loss(const GaussianState& state, std::span<const double> transmission) {
  const Index n = state.modes();
  if (static_cast<Index>(transmission.size()) != n) {
    throw InputError("apply_loss: transmission table does not match the grid");
  }
  RVector x(2 * n);
  for (Index i = 0; i < n; ++i) {
    const double eta = transmission[static_cast<std::size_t>(i)];
    if (!(eta >= 0.0 && eta <= 1.0)) throw InputError("apply_loss: transmission outside [0, 1]");
    x(i) = x(i + n) = std::sqrt(eta);
  }
  RMatrix out = x.asDiagonal() * state.sigma() * x.asDiagonal();
  out.diagonal().array() += 1.0 - x.array().square();
  return GaussianState(state.grid(), std::move(out));
}

GaussianState apply_loss(const GaussianState& state, double transmission) {
  std::vector<double> eta(state.grid().size(), transmission);
  return apply_loss(state, eta);
}

GaussianState apply_phase(const GaussianState& state, double pump_phase) {
  const Index n = state.modes();
  const double c = std::cos(0.5 * pump_phase);
  const double s = std::sin(0.5 * pump_phase);
  const auto xx = state.sigma().topLeftCorner(n, n);
  const auto pp = state.sigma().bottomRightCorner(n, n);
  const auto xp = state.sigma().topRightCorner(n, n);
  const RMatrix sym = xp + xp.transpose();
  RMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = c * c * xx - c * s * sym + s * s * pp;
  out.bottomRightCorner(n, n) = s * s * xx + c * s * sym + c * c * pp;
  out.topRightCorner(n, n) = c * s * (xx - pp) + c * c * xp - s * s * xp.transpose();
  out.bottomLeftCorner(n, n) = out.topRightCorner(n, n).transpose();
  return GaussianState(state.grid(), std::move(out));
}

GaussianState apply_bandpass(const GaussianState& state, double lo_nm, double hi_nm) {
  if (hi_nm < lo_nm) throw InputError("apply_bandpass: empty window");
  const auto& lam = state.grid().wavelengths_nm();
  const double step = state.grid().mean_wavelength_step_nm();
  if (lo_nm < lam.front() - 0.5 * step || hi_nm > lam.back() + 0.5 * step) {
    throw InputError("apply_bandpass: window extends beyond the grid");
  }
  std::vector<double> eta(lam.size(), 0.0);
  if (hi_nm > lo_nm) {
    const auto mask = state.grid().window_mask(lo_nm, hi_nm);
    for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = mask[i] ? 1.0 : 0.0;
  }
  return apply_loss(state, eta);
}

GaussianState signal_marginal(const GaussianState& state) {
  SecondMoments m = state.moments();
  m.anomalous.setZero();
  return GaussianState::from_moments(state.grid(), m);
}

RVector mean_spectrum(const GaussianState& state) {
  const Index n = state.modes();
  const auto d = state.sigma().diagonal();
  return 0.25 * (d.head(n) + d.tail(n)).array() - 0.5;
}

SpectralCovariance intensity_covariance_analytic(const GaussianState& state, ShotTerm shot) {
  const SecondMoments m = state.moments();
  SpectralCovariance out;
  out.grid = state.grid();
  out.matrix = m.normal.cwiseAbs2() + m.anomalous.cwiseAbs2();
  out.mean = m.normal.diagonal().real();
  if (shot == ShotTerm::included) out.matrix.diagonal() += out.mean;
  return out;
}

namespace {

void check_unit(const CVector& f, Index n) {
  if (f.size() != n) throw InputError("quadrature_variance_in_mode: mode does not match grid");
  if (std::abs(f.norm() - 1.0) > 1e-9) {
    throw InputError("quadrature_variance_in_mode: mode is not normalised");
  }
}

struct ModeMoments {
  double n;
  cplx m;
};

ModeMoments mode_moments(const SecondMoments& mm, const CVector& f) {
  const CVector fc = f.conjugate();
  return {(f.transpose() * mm.normal * fc)(0).real(), (f.adjoint() * mm.anomalous * fc)(0)};
}

}  // namespace

double quadrature_variance_in_mode(const SecondMoments& m, const CVector& f,
                                   double quadrature_angle) {
  check_unit(f, m.normal.rows());
  const ModeMoments mm = mode_moments(m, f);
  return 1.0 + 2.0 * mm.n + 2.0 * (std::polar(1.0, -2.0 * quadrature_angle) * mm.m).real();
}

double quadrature_variance_in_mode(const GaussianState& state, const CVector& f,
                                   double quadrature_angle) {
  return quadrature_variance_in_mode(state.moments(), f, quadrature_angle);
}

ModeQuadrature mode_quadrature(const SecondMoments& m, const CVector& f) {
  check_unit(f, m.normal.rows());
  const ModeMoments mm = mode_moments(m, f);
  ModeQuadrature out;
  double angle = 0.5 * (std::arg(mm.m) + kPi);
  angle = std::fmod(angle, kPi);
  if (angle < 0.0) angle += kPi;
  out.squeezing_angle = angle;
  out.min_variance = 1.0 + 2.0 * mm.n - 2.0 * std::abs(mm.m);
  out.max_variance = 1.0 + 2.0 * mm.n + 2.0 * std::abs(mm.m);
  return out;
}

}  // namespace mopa
