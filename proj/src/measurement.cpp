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

#include "mopa/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "mopa/errors.hpp"
#include "mopa/profile.hpp"

namespace mopa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Box-Muller on mt19937_64, written out so the stream is the same with
// every standard library.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * kPi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

RMatrix sampling_factor(const RMatrix& sigma) {
  Eigen::LLT<RMatrix> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // Singular covariance (e.g. a pure state at extreme squeezing): use the
  // symmetric square root instead.
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sigma);
  if (es.eigenvalues()(0) < -1e-9 * std::max(1.0, es.eigenvalues().maxCoeff())) {
    throw InputError("sample_frames: covariance is not positive semidefinite");
  }
  const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FrameStack sample_frames(const GaussianState& state, std::size_t n_frames, std::uint64_t seed,
                         const CameraModel& camera, unsigned threads) {
  if (n_frames == 0) throw InputError("sample_frames: need at least one frame");
  if (!(camera.quantum_efficiency > 0.0 && camera.quantum_efficiency <= 1.0)) {
    throw InputError("sample_frames: quantum efficiency outside (0, 1]");
  }
  if (camera.read_noise_rms < 0.0) throw InputError("sample_frames: negative read noise");
  const GaussianState seen =
      camera.quantum_efficiency < 1.0 ? apply_loss(state, camera.quantum_efficiency) : state;
  const Index n = seen.modes();
  const RMatrix factor = sampling_factor(seen.sigma());
  const bool triangular = factor.isLowerTriangular();

  FrameStack out;
  out.grid = seen.grid();
  out.seed = seed;
  out.frames.resize(static_cast<Index>(n_frames), n);

  auto work = [&](std::size_t begin, std::size_t end) {
    RVector z(2 * n), q(2 * n);
    for (std::size_t f = begin; f < end; ++f) {
      NormalStream rng(splitmix64(seed ^ splitmix64(f)));
      for (Index k = 0; k < 2 * n; ++k) z(k) = rng.next();
      if (triangular) {
        q.noalias() = factor.triangularView<Eigen::Lower>() * z;
      } else {
        q.noalias() = factor * z;
      }
      for (Index i = 0; i < n; ++i) {
        double v = 0.25 * (q(i) * q(i) + q(i + n) * q(i + n)) - 0.5;
        if (camera.read_noise_rms > 0.0) v += camera.read_noise_rms * rng.next();
        // Dark counts are added by the sensor and removed again by subtraction.
        v = (v + camera.dark_level) - camera.dark_level;
        if (camera.clamp_negative) v = std::max(v, 0.0);
        out.frames(static_cast<Index>(f), i) = v;
      }
    }
  };

  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_frames)));
  if (n_threads == 1) {
    work(0, n_frames);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_frames + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n_frames, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

SpectralCovariance estimate_covariance(const FrameStack& stack) {
  const Index f = stack.frames.rows();
  if (f < 2) throw InputError("estimate_covariance: need at least two frames");
  SpectralCovariance out;
  out.grid = stack.grid;
  out.frames = static_cast<std::size_t>(f);
  out.mean = stack.frames.colwise().mean().transpose();
  const RMatrix x = stack.frames.rowwise() - out.mean.transpose();
  RMatrix c = (x.transpose() * x) / static_cast<double>(f - 1);
  out.matrix = 0.5 * (c + c.transpose());
  return out;
}

RMatrix covariance_standard_errors(const FrameStack& stack) {
  const Index f = stack.frames.rows();
  if (f < 2) throw InputError("covariance_standard_errors: need at least two frames");
  const RVector mean = stack.frames.colwise().mean().transpose();
  const RMatrix x = stack.frames.rowwise() - mean.transpose();
  const RMatrix x2 = x.array().square().matrix();
  const double fd = static_cast<double>(f);
  const RMatrix m1 = (x.transpose() * x) / fd;
  const RMatrix m2 = (x2.transpose() * x2) / fd;
  RMatrix var = (m2 - m1.cwiseAbs2()).cwiseMax(0.0);
  return (var / (fd - 1.0)).cwiseSqrt();
}

double SinusoidFit::operator()(double phi) const { return offset + amplitude * std::cos(phi - phase); }

SinusoidFit fit_sinusoid(const std::vector<double>& phases, const std::vector<double>& values) {
  if (phases.size() != values.size()) throw InputError("fit_sinusoid: size mismatch");
  if (phases.size() < 3) throw InputError("fit_sinusoid: need at least three samples");
  const Index m = static_cast<Index>(phases.size());
  RMatrix a(m, 3);
  RVector b(m);
  for (Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(phases[static_cast<std::size_t>(i)]);
    a(i, 2) = std::sin(phases[static_cast<std::size_t>(i)]);
    b(i) = values[static_cast<std::size_t>(i)];
  }
  const RVector c = a.colPivHouseholderQr().solve(b);
  SinusoidFit fit;
  fit.offset = c(0);
  fit.amplitude = std::hypot(c(1), c(2));
  fit.phase = std::atan2(c(2), c(1));
  fit.residual_rms = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(m));
  return fit;
}

PsaTrace psa_trace(const DetectionChain& chain, const std::vector<double>& phases) {
  // Total detected photons are affine in the amplifier input covariance:
  // 4 n + 2N = tr(A sigma) + tr(I - X^2) with A = S^T X^2 S. Rotating the
  // input by theta makes every term a combination of cos^2, cos sin, sin^2.
  const GaussianState sq = chain.squeezed();
  const Index n = sq.modes();
  RVector x2 = RVector::Constant(2 * n, chain.post_transmission);
  if (chain.filter_nm) {
    const auto mask = chain.grid().window_mask(chain.filter_nm->first, chain.filter_nm->second);
    for (Index i = 0; i < n; ++i) {
      if (!mask[static_cast<std::size_t>(i)] || chain.filter_nm->second <= chain.filter_nm->first) {
        x2(i) = x2(i + n) = 0.0;
      }
    }
  }
  const RMatrix s = symplectic_matrix(chain.amplifier.U, chain.amplifier.V);
  const RMatrix a = s.transpose() * x2.asDiagonal() * s;
  const double c_loss = static_cast<double>(2 * n) - x2.sum();

  const auto& sig = sq.sigma();
  const auto xx = sig.topLeftCorner(n, n);
  const auto pp = sig.bottomRightCorner(n, n);
  const auto xp = sig.topRightCorner(n, n);
  const auto axx = a.topLeftCorner(n, n);
  const auto app = a.bottomRightCorner(n, n);
  const auto axp = a.topRightCorner(n, n);
  const RMatrix sym = xp + xp.transpose();
  const double t_cc = (a.array() * sig.array()).sum();
  const double t_ss = (axx.array() * pp.array()).sum() + (app.array() * xx.array()).sum() -
                      2.0 * (axp.array() * xp.transpose().array()).sum();
  const double t_cs = -(axx.array() * sym.array()).sum() + (app.array() * sym.array()).sum() +
                      2.0 * (axp.array() * (xx - pp).array()).sum();

  PsaTrace out;
  out.phases = phases;
  out.vacuum_photons = 0.25 * (a.trace() + c_loss - static_cast<double>(2 * n));
  for (double phi : phases) {
    const double c = std::cos(0.5 * phi);
    const double sn = std::sin(0.5 * phi);
    const double tr = c * c * t_cc + c * sn * t_cs + sn * sn * t_ss;
    const double photons = 0.25 * (tr + c_loss - static_cast<double>(2 * n));
    out.photons.push_back(photons);
    out.normalized.push_back(out.vacuum_photons > 0.0 ? photons / out.vacuum_photons : 0.0);
  }
  return out;
}

Fringes find_fringes(const PsaTrace& trace) {
  const auto& ph = trace.phases;
  if (ph.size() < 3) throw InputError("find_fringes: trace has fewer than three samples");
  const auto [lo, hi] = std::minmax_element(ph.begin(), ph.end());
  const double span = *hi - *lo;
  const double spacing = span / static_cast<double>(ph.size() - 1);
  if (span + spacing < 2.0 * kPi - 1e-9) {
    throw InputError("find_fringes: trace covers less than one period");
  }
  Fringes out;
  out.fit = fit_sinusoid(ph, trace.normalized);
  auto wrap = [](double x) {
    double y = std::fmod(x, 2.0 * kPi);
    if (y < 0.0) y += 2.0 * kPi;
    return (y >= 2.0 * kPi - 1e-12 || y < 1e-15) ? 0.0 : y;
  };
  const double scale = std::max(std::abs(out.fit.offset), 1e-300);
  if (out.fit.amplitude < 1e-6 * scale) {
    out.warnings.push_back("trace shows no phase dependence; fringe positions undefined");
    out.bright_phase = 0.0;
    out.dark_phase = kPi;
    return out;
  }
  if (out.fit.residual_rms > 0.05 * out.fit.amplitude) {
    out.warnings.push_back("trace deviates from a sinusoid; phase may be unstable");
  }
  out.bright_phase = wrap(out.fit.phase);
  out.dark_phase = wrap(out.fit.phase + kPi);
  return out;
}

CovarianceWidths covariance_widths(const SpectralCovariance& cov) {
  const Index n = cov.matrix.rows();
  if (n == 0 || cov.matrix.cols() != n) throw InputError("covariance_widths: bad matrix");
  const RVector d = cov.matrix.diagonal();
  if (!(d.maxCoeff() > 0.0)) throw InputError("covariance_widths: diagonal is not positive");
  CovarianceWidths out;
  d.maxCoeff(&out.peak_bin);
  std::vector<double> dy(d.data(), d.data() + n);
  const FwhmResult diag = fwhm(cov.grid.wavelengths_nm(), dy);
  out.unconditional_nm = diag.width;

  const Index p = out.peak_bin;
  const Index reach = std::min(p, n - 1 - p);
  std::vector<double> x, y;
  for (Index k = -reach; k <= reach; ++k) {
    x.push_back(cov.grid.wavelength_nm(static_cast<std::size_t>(p + k)) -
                cov.grid.wavelength_nm(static_cast<std::size_t>(p - k)));
    y.push_back(cov.matrix(p + k, p - k));
  }
  const FwhmResult anti = fwhm(x, y);
  out.conditional_pm = anti.width * 1e3;
  out.multi_peak = diag.multi_peak || anti.multi_peak;
  return out;
}

}  // namespace mopa
