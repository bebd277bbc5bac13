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

#include "mopa/errors.hpp"
#include "mopa/gaussian_state.hpp"
#include "mopa/measurement.hpp"
#include "mopa/mode_analysis.hpp"
#include "mopa/reconstruction.hpp"
#include "test_util.hpp"

namespace mopa {
namespace {

SpectralCovariance from_g1(const RMatrix& g1) {
  SpectralCovariance c;
  c.grid = make_grid(709.34, 8.0, static_cast<std::size_t>(g1.rows()));
  c.matrix = g1.cwiseAbs2();
  c.mean = g1.diagonal();
  return c;
}

OverlapMatrix identity_overlap(Index n) {
  OverlapMatrix o;
  o.g = RMatrix::Identity(n, n);
  for (Index k = 0; k < n; ++k) {
    o.row_labels.push_back(static_cast<int>(k) + 1);
    o.col_labels.push_back(static_cast<int>(k) + 1);
  }
  return o;
}

TEST(CoherentModes, RankOneCovariance) {
  RVector u(5);
  u << 0.1, 0.4, 0.8, 0.4, 0.1;
  u.normalize();
  const CoherentModes m = coherent_modes(from_g1(3.0 * u * u.transpose()));
  ASSERT_GE(m.weights.size(), 1);
  EXPECT_NEAR(m.weights(0), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(m.modes.col(0).dot(u)), 1.0, 1e-10);
  EXPECT_NEAR(m.eigenvalues(0), 3.0, 1e-10);
  EXPECT_LT(m.residual, 1e-10);
}

TEST(CoherentModes, RejectsUnphysicalSpectrum) {
  RMatrix c(2, 2);
  c << 0.0, 1.0, 1.0, 0.0;
  SpectralCovariance s = from_g1(c);
  EXPECT_THROW(coherent_modes(s), NumericalError);
  s.matrix.setZero();
  EXPECT_THROW(coherent_modes(s), InputError);
}

TEST(CoherentModes, WeightsTrackAmplifierModes) {
  const KernelModel m = testing::at_gain(testing::gaussian_model(64, 1.0), 4.5);
  const TransferMatrices t = compute_transfer(m);
  const GaussianState av = signal_marginal(apply_transfer(GaussianState::vacuum(t.grid), t));
  const CoherentModes d = coherent_modes(intensity_covariance_analytic(av, ShotTerm::excluded));
  const ModeBasis b = schmidt_modes(t, 64);
  double tv = 0.0;
  const Index k = std::max<Index>(d.weights.size(), b.weights.size());
  for (Index i = 0; i < k; ++i) {
    const double x = i < d.weights.size() ? d.weights(i) : 0.0;
    const double y = i < b.weights.size() ? b.weights(i) : 0.0;
    tv += 0.5 * std::abs(x - y);
  }
  EXPECT_LT(tv, 0.02);
}

TEST(CoherentModes, SampledSingleModeThermalLight) {
  const Index n = 32;
  const FrequencyGrid g = make_grid(709.34, 8.0, static_cast<std::size_t>(n));
  CVector u(n);
  for (Index i = 0; i < n; ++i) u(i) = std::exp(-0.5 * std::pow((i - 15.5) / 5.0, 2));
  u.normalize();
  // Bright enough that the shot-noise diagonal is negligible.
  SecondMoments m{2000.0 * u * u.adjoint(), CMatrix::Zero(n, n)};
  const GaussianState s = GaussianState::from_moments(g, m);
  const CoherentModes d = coherent_modes(estimate_covariance(sample_frames(s, 10000, 8)));
  EXPECT_GE(d.weights(0), 0.95);
  EXPECT_GT(std::abs(d.modes.col(0).dot(u.real())), 0.99);
}

TEST(ModalIntensities, SumToTotalPhotons) {
  RVector u(4), v(4);
  u << 0.5, 0.5, 0.5, 0.5;
  v << 0.5, -0.5, 0.5, -0.5;
  const RMatrix g1 = 2.0 * u * u.transpose() + 1.0 * v * v.transpose();
  const SpectralCovariance c = from_g1(g1);
  const CoherentModes d = coherent_modes(c);
  const RVector i = modal_intensities(d, c.mean);
  EXPECT_NEAR(i.sum(), c.mean.sum(), 1e-12);
}

TEST(Matching, RecoversPermutation) {
  RMatrix modes = RMatrix::Zero(3, 3);
  modes(2, 0) = 1.0;
  modes(0, 1) = -1.0;
  modes(1, 2) = 1.0;
  const std::vector<int> m = match_modes(modes, CMatrix::Identity(3, 3));
  EXPECT_EQ(m, (std::vector<int>{2, 0, 1}));
  RVector w(2);
  w << 5.0, 7.0;
  const RVector a = assign_intensities(w, {1, -1}, 3);
  EXPECT_EQ(a(1), 5.0);
  EXPECT_TRUE(std::isnan(a(0)));
  EXPECT_TRUE(std::isnan(a(2)));
  EXPECT_THROW(assign_intensities(w, {0}, 3), InputError);
}

TEST(GainCalibration, RetainsModesAboveFloor) {
  RVector v(3);
  v << 10.0, 1e-3, 0.0;
  const GainCalibration c = gain_calibration(v, 1e-2);
  EXPECT_EQ(c.retained, (std::vector<bool>{true, false, false}));
  EXPECT_THROW(gain_calibration(v, -1.0), InputError);
}

TEST(Reconstruction, VacuumGivesExactlyZeroDecibels) {
  RVector vac(4);
  vac << 40.0, 30.0, 20.0, 10.0;
  const SqueezingReport r = reconstruct_squeezing(vac, vac, identity_overlap(4), gain_calibration(vac, 0.0));
  ASSERT_EQ(r.modes.size(), 4u);
  for (const auto& m : r.modes) {
    EXPECT_EQ(m.squeezing_db, 0.0);
    EXPECT_EQ(m.antisqueezing_db, 0.0);
  }
}

TEST(Reconstruction, ScaledIntensitiesGiveVariances) {
  RVector vac(3);
  vac << 9.0, 4.0, 1.0;
  const SqueezingReport r =
      reconstruct_squeezing(0.25 * vac, 4.0 * vac, identity_overlap(3), gain_calibration(vac, 0.0));
  ASSERT_EQ(r.modes.size(), 3u);
  EXPECT_NEAR(r.modes[1].squeezing_db, to_db(0.25), 1e-12);
  EXPECT_NEAR(r.modes[1].antisqueezing_db, to_db(4.0), 1e-12);
  EXPECT_TRUE(r.modes[1].flags.empty());
  EXPECT_EQ(r.modes[2].mode, 3);
}

TEST(Reconstruction, TruncationBoundAndExclusion) {
  RVector vac(3);
  vac << 9.0, 4.0, 1.0;
  OverlapMatrix o = identity_overlap(3);
  o.g(0, 0) = std::sqrt(0.98);
  o.g(1, 1) = std::sqrt(0.5);
  const SqueezingReport r = reconstruct_squeezing(vac, vac, o, gain_calibration(vac, 0.0));
  ASSERT_EQ(r.modes.size(), 2u);
  EXPECT_NEAR(r.modes[0].truncation_bound, 0.02, 1e-12);
  ASSERT_EQ(r.excluded.size(), 1u);
  EXPECT_EQ(r.excluded[0].mode, 2);
  EXPECT_NE(r.excluded[0].reason.find("coverage"), std::string::npos);
}

TEST(Reconstruction, FlagsUnphysicalResults) {
  RVector vac(1);
  vac << 5.0;
  const SqueezingReport r =
      reconstruct_squeezing(0.5 * vac, 0.5 * vac, identity_overlap(1), gain_calibration(vac, 0.0));
  ASSERT_EQ(r.modes.size(), 1u);
  EXPECT_EQ(r.modes[0].flags.size(), 1u);
  const SqueezingReport s =
      reconstruct_squeezing(2.0 * vac, 0.8 * vac, identity_overlap(1), gain_calibration(vac, 0.0));
  EXPECT_EQ(s.modes[0].flags.front(), "squeezing exceeds antisqueezing");
}

TEST(Decibels, Values) {
  EXPECT_EQ(to_db(1.0), 0.0);
  EXPECT_NEAR(to_db(0.5), -3.0103, 1e-4);
  EXPECT_NEAR(to_db(10.0), 10.0, 1e-14);
  EXPECT_THROW(to_db(0.0), InputError);
  EXPECT_THROW(to_db(-1.0), InputError);
}

TEST(SqueezingAxis, FollowsTakagiPhaseAndDarkFringe) {
  ModeBasis amp;
  amp.takagi_phases.resize(2);
  amp.takagi_phases << std::polar(1.0, 0.0), std::polar(1.0, 0.5 * kPi);
  OverlapMatrix o = identity_overlap(2);
  EXPECT_NEAR(reconstructed_squeezing_axis(o, amp, 0, kPi), 0.5 * kPi, 1e-12);
  EXPECT_NEAR(reconstructed_squeezing_axis(o, amp, 1, kPi), 0.0, 1e-12);
  EXPECT_THROW(reconstructed_squeezing_axis(o, amp, 2, 0.0), InputError);
}

}  // namespace
}  // namespace mopa
