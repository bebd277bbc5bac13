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

#include "mopa/bogoliubov.hpp"
#include "mopa/errors.hpp"
#include "test_util.hpp"

namespace mopa {
namespace {

using testing::max_abs;

TEST(Takagi, ReconstructsRandomSymmetricMatrix) {
  const CMatrix J = testing::random_symmetric(6, 11);
  const Takagi t = takagi_factor(J);
  const CMatrix& W = t.vectors;
  EXPECT_LT(max_abs(W * t.values.asDiagonal() * W.transpose() - J), 1e-12);
  EXPECT_LT(max_abs(W.adjoint() * W - CMatrix::Identity(6, 6)), 1e-12);
  for (Index k = 1; k < 6; ++k) EXPECT_GE(t.values(k - 1), t.values(k));
  Eigen::JacobiSVD<CMatrix> svd(J);
  EXPECT_LT((svd.singularValues() - t.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Takagi, HandlesRankDeficientInput) {
  CVector v = CVector::Zero(5);
  v << cplx(1, 2), cplx(0, 1), cplx(-1, 0), cplx(0.5, 0.5), cplx(0, 0);
  const CMatrix J = v * v.transpose();
  const Takagi t = takagi_factor(J);
  EXPECT_LT(max_abs(t.vectors * t.values.asDiagonal() * t.vectors.transpose() - J), 1e-12);
  EXPECT_LT(max_abs(t.vectors.adjoint() * t.vectors - CMatrix::Identity(5, 5)), 1e-12);
  EXPECT_NEAR(t.values(0), v.squaredNorm(), 1e-12);
  EXPECT_LT(t.values.tail(4).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Takagi, RejectsAsymmetricInput) {
  CMatrix J = testing::random_symmetric(4, 3);
  J(0, 1) += 1e-3;
  EXPECT_THROW(takagi_factor(J), InputError);
  EXPECT_THROW(takagi_factor(CMatrix::Zero(2, 3)), InputError);
}

TEST(Magnus, ZeroKernelIsIdentity) {
  const BogoliubovPair p = magnus1_pair(CMatrix::Zero(4, 4));
  EXPECT_LT(max_abs(p.U - CMatrix::Identity(4, 4)), 1e-15);
  EXPECT_LT(max_abs(p.V), 1e-15);
}

TEST(Magnus, DiagonalKernelGivesIndependentSqueezers) {
  CMatrix J = CMatrix::Zero(3, 3);
  J(0, 0) = 1.1;
  J(1, 1) = 0.5;
  J(2, 2) = 0.2;
  const BogoliubovPair p = magnus1_pair(J);
  for (Index k = 0; k < 3; ++k) {
    EXPECT_NEAR(p.U(k, k).real(), std::cosh(J(k, k).real()), 1e-14);
    EXPECT_NEAR(p.V(k, k).real(), std::sinh(J(k, k).real()), 1e-14);
  }
  EXPECT_LT(max_abs(p.U.imag()) + max_abs(p.V.imag()), 1e-14);
}

TEST(Magnus, RandomKernelIsSymplectic) {
  const CMatrix J = testing::random_symmetric(6, 5, 0.7);
  const BogoliubovPair p = magnus1_pair(J);
  EXPECT_LT(symplectic_defect(p.U, p.V), 1e-12);
  EXPECT_LT(symmetry_defect(p.U, p.V), 1e-12);
}

TEST(Propagate, SingleModeMatchesHyperbolicFunctions) {
  const double kappa = 367.0, length = 3e-3;
  CMatrix K(1, 1);
  K(0, 0) = kappa;
  const BogoliubovPair p = propagate([&](double) { return K; }, 1, length);
  EXPECT_NEAR(p.U(0, 0).real(), std::cosh(kappa * length), 1e-10);
  EXPECT_NEAR(p.V(0, 0).real(), std::sinh(kappa * length), 1e-10);
}

TEST(Propagate, ZeroKernelIsIdentity) {
  const BogoliubovPair p =
      propagate([](double) { return CMatrix::Zero(4, 4).eval(); }, 4, 1e-3);
  EXPECT_LT(max_abs(p.U - CMatrix::Identity(4, 4)), 1e-15);
  EXPECT_LT(max_abs(p.V), 1e-15);
}

TEST(Propagate, ConstantKernelMatchesMagnus) {
  const KernelModel m = testing::at_gain(testing::gaussian_model(48, 1.0), 1.1);
  const TransferMatrices rk = propagate(m);
  const TransferMatrices mg = magnus1_transfer(m.grid(), m.integrated());
  EXPECT_LT(max_abs(rk.U - mg.U), 1e-8);
  EXPECT_LT(max_abs(rk.V - mg.V), 1e-8);
}

TEST(Propagate, DefectStaysSmallForDependentKernel) {
  const KernelModel m = testing::at_gain(testing::quadratic_model(40, 1.0, 8.0, 6.0), 1.1);
  PropagationDiagnostics d;
  const TransferMatrices t = propagate(m, {}, &d);
  EXPECT_LT(t.symplectic_defect(), 1e-9);
  EXPECT_LT(t.symmetry_defect(), 1e-9);
  EXPECT_GT(d.checkpoints, 0);
  EXPECT_LE(d.max_symplectic_defect, 1e-6);
}

TEST(Propagate, ThrowsWhenInvariantsDrift) {
  CMatrix K(1, 1);
  K(0, 0) = 4000.0;
  PropagationOptions o;
  o.n_steps = 2;
  o.checkpoint_every = 1;
  EXPECT_THROW(propagate([&](double) { return K; }, 1, 3e-3, o), NumericalError);
}

TEST(Propagate, StepHalvingConverges) {
  const KernelModel m = testing::at_gain(testing::quadratic_model(32, 1.0, 8.0, 6.0), 1.1);
  auto gain = [&](int steps) {
    PropagationOptions o;
    o.n_steps = steps;
    return fundamental_gain(propagate(m, o));
  };
  const double g50 = gain(50), g100 = gain(100), g200 = gain(200);
  EXPECT_LT(std::abs(g200 - g100), std::abs(g100 - g50));
  EXPECT_LT(std::abs(g200 - g100), 1e-8);
}

TEST(Transfer, InverseAndComposition) {
  const KernelModel m = testing::at_gain(testing::gaussian_model(24, 1.0), 0.9);
  const TransferMatrices t = compute_transfer(m);
  const TransferMatrices id = t.then(t.inverse());
  EXPECT_LT(max_abs(id.U - CMatrix::Identity(24, 24)), 1e-10);
  EXPECT_LT(max_abs(id.V), 1e-10);
  // Two identical constant-kernel crystals add their gains.
  EXPECT_NEAR(fundamental_gain(t.then(t)), 1.8, 1e-10);
}

TEST(Calibration, HitsRequestedGains) {
  const KernelModel g = testing::gaussian_model(48, 1.0);
  for (double r : {1.1, 4.5}) {
    const KernelModel m = g.with_coupling_strength(calibrate_gain(r, g));
    EXPECT_NEAR(fundamental_gain(compute_transfer(m)), r, 1e-4);
  }
  const KernelModel q = testing::quadratic_model(24, 1.0, 8.0, 6.0);
  CalibrationOptions o;
  o.propagation.n_steps = 100;
  for (double r : {1.1, 4.5}) {
    const KernelModel m = q.with_coupling_strength(calibrate_gain(r, q, o));
    EXPECT_NEAR(fundamental_gain(compute_transfer(m, o.propagation)), r, 1e-4);
  }
}

TEST(Calibration, StrengthIsMonotonicInGain) {
  const KernelModel q = testing::quadratic_model(24, 1.0, 8.0, 6.0);
  CalibrationOptions o;
  o.propagation.n_steps = 60;
  double last = 0.0;
  for (double r : {0.1, 0.5, 1.1, 2.0}) {
    const double s = calibrate_gain(r, q, o);
    EXPECT_GT(s, last);
    last = s;
  }
  EXPECT_THROW(calibrate_gain(-1.0, q, o), InputError);
}

TEST(Calibration, VanishingKernelIsReported) {
  // A grid far from degeneracy sees no pump overlap at all.
  CrystalParams c;
  c.phase_matching = gaussian_phase_matching_for_fwhm(709.34, 37.0);
  const KernelModel m(make_grid(600.0, 1.0, 8), PumpProfile{}, c);
  EXPECT_THROW(calibrate_gain(1.0, m), CalibrationError);
}

TEST(FundamentalGain, ReadsLargestSingularValue) {
  CMatrix V = CMatrix::Zero(2, 2);
  V(0, 1) = V(1, 0) = std::sinh(0.7);
  EXPECT_NEAR(fundamental_gain(V), 0.7, 1e-14);
}

}  // namespace
}  // namespace mopa
