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


#include <cmath>

#include <gtest/gtest.h>

#include "mopa/detection_chain.hpp"
#include "mopa/errors.hpp"
#include "mopa/gaussian_state.hpp"
#include "test_util.hpp"

namespace mopa {
namespace {

using testing::max_abs;

const double kR = 1.1;

GaussianState single_mode_squeezed(double r) {
  const FrequencyGrid g = make_grid(709.34, 8.0, 1);
  CMatrix J(1, 1);
  J(0, 0) = r;
  return apply_transfer(GaussianState::vacuum(g), magnus1_transfer(g, J));
}

GaussianState two_mode_squeezed(double r) {
  const FrequencyGrid g = make_grid(709.34, 8.0, 2);
  CMatrix J = CMatrix::Zero(2, 2);
  J(0, 1) = J(1, 0) = r;
  return apply_transfer(GaussianState::vacuum(g), magnus1_transfer(g, J));
}

CVector unit(Index n, Index k) {
  CVector f = CVector::Zero(n);
  f(k) = 1.0;
  return f;
}

TEST(GaussianState, VacuumIsIdentity) {
  const GaussianState v = GaussianState::vacuum(make_grid(709.34, 8.0, 5));
  EXPECT_EQ((v.sigma() - RMatrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 0.0);
  const SecondMoments m = v.moments();
  EXPECT_LT(max_abs(m.normal) + max_abs(m.anomalous), 1e-15);
  EXPECT_NEAR(quadrature_variance_in_mode(v, unit(5, 2), 0.7), 1.0, 1e-15);
}

TEST(GaussianState, RejectsMalformedCovariance) {
  const FrequencyGrid g = make_grid(709.34, 8.0, 2);
  EXPECT_THROW(GaussianState(g, RMatrix::Identity(3, 3)), InputError);
  RMatrix s = RMatrix::Identity(4, 4);
  s(0, 1) = 0.5;
  EXPECT_THROW(GaussianState(g, s), InputError);
}

TEST(GaussianState, MomentsRoundTrip) {
  const GaussianState s = apply_loss(two_mode_squeezed(0.8), 0.7);
  const GaussianState back = GaussianState::from_moments(s.grid(), s.moments());
  EXPECT_LT((back.sigma() - s.sigma()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Squeezing, SingleModeExtremes) {
  const GaussianState s = single_mode_squeezed(kR);
  const CVector f = unit(1, 0);
  EXPECT_NEAR(quadrature_variance_in_mode(s, f, 0.0), std::exp(2 * kR), 1e-12);
  EXPECT_NEAR(quadrature_variance_in_mode(s, f, 0.5 * kPi), std::exp(-2 * kR), 1e-12);
  EXPECT_NEAR(std::exp(-2 * kR), 0.1108, 5e-5);
  EXPECT_NEAR(std::exp(2 * kR), 9.025, 5e-4);
  const ModeQuadrature q = mode_quadrature(s.moments(), f);
  EXPECT_NEAR(q.squeezing_angle, 0.5 * kPi, 1e-12);
  EXPECT_NEAR(q.min_variance, std::exp(-2 * kR), 1e-12);
  EXPECT_NEAR(q.max_variance, std::exp(2 * kR), 1e-12);
}

TEST(Squeezing, LossMixesInVacuum) {
  const GaussianState s = apply_loss(single_mode_squeezed(kR), 0.88);
  const double v = quadrature_variance_in_mode(s, unit(1, 0), 0.5 * kPi);
  EXPECT_NEAR(v, 0.88 * std::exp(-2 * kR) + 0.12, 1e-12);
  EXPECT_NEAR(v, 0.2175, 5e-5);
  EXPECT_NEAR(10.0 * std::log10(v), -6.62, 0.01);
}

TEST(Squeezing, RejectsNonUnitMode) {
  const GaussianState s = single_mode_squeezed(kR);
  CVector f(1);
  f(0) = 1.1;
  EXPECT_THROW(quadrature_variance_in_mode(s, f, 0.0), InputError);
}

TEST(Phase, PumpPhaseRotatesQuadratureByHalf) {
  const GaussianState s = apply_loss(two_mode_squeezed(0.9), 0.9);
  CVector f(2);
  f << cplx(0.6, 0.0), cplx(0.0, 0.8);
  for (double phi : {0.3, 1.7, 4.0}) {
    const GaussianState t = apply_phase(s, phi);
    for (double th : {0.0, 0.4, 2.2}) {
      EXPECT_NEAR(quadrature_variance_in_mode(t, f, th), quadrature_variance_in_mode(s, f, th - 0.5 * phi),
                  1e-12);
    }
  }
}

TEST(Phase, TwoPiPeriodic) {
  const GaussianState s = apply_loss(two_mode_squeezed(0.9), 0.8);
  EXPECT_LT((apply_phase(s, 2.0 * kPi).sigma() - s.sigma()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((apply_phase(apply_phase(s, 1.2), -1.2).sigma() - s.sigma()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Transfer, InverseRestoresState) {
  const KernelModel m = testing::at_gain(testing::gaussian_model(10, 1.0, 8.0, 3.0), 1.1);
  const TransferMatrices t = compute_transfer(m);
  const GaussianState s = apply_loss(apply_transfer(GaussianState::vacuum(t.grid), t), 0.6);
  const GaussianState back = apply_transfer(apply_transfer(s, t), t.inverse());
  EXPECT_LT((back.sigma() - s.sigma()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Transfer, PureStatesStayPure) {
  const KernelModel m = testing::at_gain(testing::gaussian_model(10, 1.0, 8.0, 3.0), 1.1);
  const TransferMatrices t = compute_transfer(m);
  const GaussianState s = apply_transfer(GaussianState::vacuum(t.grid), t);
  EXPECT_NEAR(std::log(s.sigma().determinant()), 0.0, 1e-8);
  const RMatrix S = symplectic_matrix(t.U, t.V);
  RMatrix omega = RMatrix::Zero(20, 20);
  omega.topRightCorner(10, 10) = RMatrix::Identity(10, 10);
  omega.bottomLeftCorner(10, 10) = -RMatrix::Identity(10, 10);
  EXPECT_LT((S * omega * S.transpose() - omega).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT(apply_loss(s, 0.5).sigma().determinant(), 1.0 + 1e-3);
}

TEST(Transfer, RejectsNonSymplecticMap) {
  const FrequencyGrid g = make_grid(709.34, 8.0, 2);
  TransferMatrices t = TransferMatrices::identity(g);
  t.V(0, 0) = 0.5;
  EXPECT_THROW(apply_transfer(GaussianState::vacuum(g), t), InputError);
}

TEST(Uncertainty, PhysicalStatesRespectBound) {
  EXPECT_GT(single_mode_squeezed(kR).min_uncertainty_eigenvalue(), -1e-10);
  EXPECT_GT(apply_loss(two_mode_squeezed(1.3), 0.4).min_uncertainty_eigenvalue(), -1e-10);
  const GaussianState bad(make_grid(709.34, 8.0, 1), 0.5 * RMatrix::Identity(2, 2));
  EXPECT_LT(bad.min_uncertainty_eigenvalue(), -0.1);
}

TEST(Bandpass, FullWindowAndZeroWidth) {
  const GaussianState s = apply_loss(two_mode_squeezed(0.9), 0.9);
  const auto& lam = s.grid().wavelengths_nm();
  const GaussianState full = apply_bandpass(s, lam.front(), lam.back());
  EXPECT_LT((full.sigma() - s.sigma()).cwiseAbs().maxCoeff(), 1e-15);
  const GaussianState none = apply_bandpass(s, 709.0, 709.0);
  EXPECT_LT((none.sigma() - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(apply_bandpass(s, 710.0, 709.0), InputError);
  EXPECT_THROW(apply_bandpass(s, 600.0, 800.0), InputError);
}

TEST(Bandpass, KeepsOnlyBinsInsideWindow) {
  const KernelModel m = testing::at_gain(testing::gaussian_model(9, 1.0, 8.0, 3.0), 1.0);
  const GaussianState s = apply_transfer(GaussianState::vacuum(m.grid()), compute_transfer(m));
  const GaussianState f = apply_bandpass(s, 707.34, 711.34);
  const RVector n = mean_spectrum(f);
  for (std::size_t i = 0; i < 9; ++i) {
    const double lam = m.grid().wavelength_nm(i);
    if (lam < 707.34 - 1e-9 || lam > 711.34 + 1e-9) {
      EXPECT_NEAR(n(static_cast<Index>(i)), 0.0, 1e-14);
    } else {
      EXPECT_GT(n(static_cast<Index>(i)), 0.0);
    }
  }
}

TEST(MeanSpectrum, SqueezedVacuumPhotonNumber) {
  const RVector n = mean_spectrum(single_mode_squeezed(kR));
  EXPECT_NEAR(n(0), std::pow(std::sinh(kR), 2), 1e-12);
  EXPECT_NEAR(n(0), 1.78, 0.005);
}

TEST(IntensityCovariance, ThermalMarginal) {
  const GaussianState s = signal_marginal(two_mode_squeezed(kR));
  const double nbar = std::pow(std::sinh(kR), 2);
  EXPECT_LT(max_abs(s.moments().anomalous), 1e-14);
  const SpectralCovariance with = intensity_covariance_analytic(s, ShotTerm::included);
  const SpectralCovariance without = intensity_covariance_analytic(s, ShotTerm::excluded);
  EXPECT_NEAR(with.matrix(0, 0), nbar * nbar + nbar, 1e-10);
  EXPECT_NEAR(without.matrix(0, 0), nbar * nbar, 1e-10);
  EXPECT_NEAR(without.matrix(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(with.mean(1), nbar, 1e-12);
  EXPECT_EQ(with.frames, 0u);
}

TEST(IntensityCovariance, PairCorrelationsOfFullState) {
  const GaussianState s = two_mode_squeezed(kR);
  const SpectralCovariance c = intensity_covariance_analytic(s, ShotTerm::excluded);
  const double nbar = std::pow(std::sinh(kR), 2);
  // |M_01|^2 = sinh^2 cosh^2 = n (n + 1).
  EXPECT_NEAR(c.matrix(0, 1), nbar * (nbar + 1.0), 1e-10);
}

TEST(IntensityCovariance, VacuumIsZero) {
  const GaussianState v = GaussianState::vacuum(make_grid(709.34, 8.0, 4));
  EXPECT_LT(intensity_covariance_analytic(v).matrix.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DetectionChain, BlockedSqueezerAndPeriodicity) {
  const KernelModel base = testing::gaussian_model(12, 1.0, 8.0, 3.0);
  DetectionChain chain;
  chain.squeezer = compute_transfer(testing::at_gain(base, 1.1));
  chain.amplifier = compute_transfer(testing::at_gain(base, 2.0));
  chain.pre_transmission.assign(12, 0.88);
  chain.post_transmission = 0.5;
  const GaussianState v = chain.vacuum_output();
  const GaussianState direct = apply_loss(apply_transfer(GaussianState::vacuum(base.grid()), chain.amplifier), 0.5);
  EXPECT_LT((v.sigma() - direct.sigma()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((chain.output(0.4).sigma() - chain.output(0.4 + 2 * kPi).sigma()).cwiseAbs().maxCoeff(), 1e-8);
  // Dark and bright fringes lie on opposite sides of the blocked level.
  const double n_vac = mean_spectrum(v).sum();
  const double a = mean_spectrum(chain.output(0.0)).sum();
  const double b = mean_spectrum(chain.output(kPi)).sum();
  EXPECT_LT(std::min(a, b), n_vac);
  EXPECT_GT(std::max(a, b), n_vac);
}

}  // namespace
}  // namespace mopa
