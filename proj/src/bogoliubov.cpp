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

#include "mopa/bogoliubov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "mopa/errors.hpp"

namespace mopa {

double symplectic_defect(const CMatrix& U, const CMatrix& V) {
  const Index n = U.rows();
  if (n == 0) return 0.0;
  CMatrix d = U * U.adjoint() - V * V.adjoint() - CMatrix::Identity(n, n);
  return d.cwiseAbs().maxCoeff();
}

double symmetry_defect(const CMatrix& U, const CMatrix& V) {
  if (U.rows() == 0) return 0.0;
  CMatrix uv = U * V.transpose();
  return (uv - uv.transpose()).cwiseAbs().maxCoeff();
}

TransferMatrices TransferMatrices::identity(const FrequencyGrid& grid) {
  const Index n = grid.isize();
  return {grid, CMatrix::Identity(n, n), CMatrix::Zero(n, n)};
}

TransferMatrices TransferMatrices::inverse() const { return {grid, U.adjoint(), -V.transpose()}; }

TransferMatrices TransferMatrices::then(const TransferMatrices& next) const {
  // a'' = U2 (U1 a + V1 a+) + V2 (U1* a+ + V1* a).
  return {grid, next.U * U + next.V * V.conjugate(), next.U * V + next.V * U.conjugate()};
}

BogoliubovPair propagate(const KernelFunction& kernel, Index dim, double length,
                         const PropagationOptions& options, PropagationDiagnostics* diagnostics) {
  if (options.n_steps < 1) throw InputError("propagate: n_steps must be positive");
  if (!(length > 0.0)) throw InputError("propagate: length must be positive");
  const int every = options.checkpoint_every > 0 ? options.checkpoint_every
                                                 : std::max(1, options.n_steps / 20);
  const double h = length / options.n_steps;
  CMatrix U = CMatrix::Identity(dim, dim);
  CMatrix V = CMatrix::Zero(dim, dim);
  PropagationDiagnostics diag;

  for (int step = 0; step < options.n_steps; ++step) {
    const double z = step * h;
    const CMatrix K0 = kernel(z);
    const CMatrix Km = kernel(z + 0.5 * h);
    const CMatrix K1 = kernel(z + h);
    const CMatrix k1u = K0 * V.conjugate();
    const CMatrix k1v = K0 * U.conjugate();
    CMatrix Ut = U + (0.5 * h) * k1u;
    CMatrix Vt = V + (0.5 * h) * k1v;
    const CMatrix k2u = Km * Vt.conjugate();
    const CMatrix k2v = Km * Ut.conjugate();
    Ut = U + (0.5 * h) * k2u;
    Vt = V + (0.5 * h) * k2v;
    const CMatrix k3u = Km * Vt.conjugate();
    const CMatrix k3v = Km * Ut.conjugate();
    Ut = U + h * k3u;
    Vt = V + h * k3v;
    const CMatrix k4u = K1 * Vt.conjugate();
    const CMatrix k4v = K1 * Ut.conjugate();
    U += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    V += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

    if ((step + 1) % every == 0 || step + 1 == options.n_steps) {
      const double sd = symplectic_defect(U, V);
      const double td = symmetry_defect(U, V);
      ++diag.checkpoints;
      diag.max_symplectic_defect = std::max(diag.max_symplectic_defect, sd);
      diag.max_symmetry_defect = std::max(diag.max_symmetry_defect, td);
      if (!(sd <= options.invariant_tolerance) || !(td <= options.invariant_tolerance)) {
        throw NumericalError(fmt::format(
            "propagate: invariant drift {:.3e} at step {} exceeds {:.1e}; increase n_steps",
            std::max(sd, td), step + 1, options.invariant_tolerance));
      }
    }
  }
  if (diagnostics) *diagnostics = diag;
  return {std::move(U), std::move(V)};
}

TransferMatrices propagate(const KernelModel& model, const PropagationOptions& options,
                           PropagationDiagnostics* diagnostics) {
  auto pair = propagate([&model](double z) { return model.at(z); }, model.grid().isize(),
                        model.length(), options, diagnostics);
  return {model.grid(), std::move(pair.U), std::move(pair.V)};
}

BogoliubovPair magnus1_pair(const CMatrix& J) {
  if (J.rows() != J.cols()) throw InputError("magnus1: kernel is not square");
  if (asymmetry(J) > 1e-10) throw InputError("magnus1: integrated kernel is not symmetric");
  const Takagi t = takagi_factor(J, 1e-10);
  const Index n = J.rows();
  RVector ch(n), sh(n);
  for (Index k = 0; k < n; ++k) {
    ch(k) = std::cosh(t.values(k));
    sh(k) = std::sinh(t.values(k));
  }
  const CMatrix& W = t.vectors;
  CMatrix U = W * ch.asDiagonal() * W.adjoint();
  CMatrix V = W * sh.asDiagonal() * W.transpose();
  return {std::move(U), std::move(V)};
}

TransferMatrices magnus1_transfer(const FrequencyGrid& grid, const CMatrix& J) {
  if (J.rows() != grid.isize()) throw InputError("magnus1: kernel does not match grid");
  auto pair = magnus1_pair(J);
  return {grid, std::move(pair.U), std::move(pair.V)};
}

TransferMatrices compute_transfer(const KernelModel& model, const PropagationOptions& options) {
  if (model.z_independent()) return magnus1_transfer(model.grid(), model.integrated());
  return propagate(model, options);
}

double fundamental_gain(const CMatrix& V) {
  if (V.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(V);
  return std::asinh(svd.singularValues()(0));
}

double fundamental_gain(const TransferMatrices& t) { return fundamental_gain(t.V); }

double calibrate_gain(double target_gain, const KernelModel& model,
                      const CalibrationOptions& options) {
  if (!(target_gain > 0.0) || !std::isfinite(target_gain)) {
    throw InputError("calibrate_gain: target gain must be positive");
  }
  // The first Magnus term gives r_1 = sigma_max(J), linear in strength.
  const KernelModel unit = model.with_coupling_strength(1.0);
  Eigen::JacobiSVD<CMatrix> svd(unit.integrated());
  const double unit_gain = svd.singularValues()(0);
  if (!(unit_gain > 0.0)) throw CalibrationError("calibrate_gain: kernel vanishes on this grid");
  const double guess = target_gain / unit_gain;
  if (model.z_independent()) return guess;

  auto residual = [&](double s) {
    return fundamental_gain(compute_transfer(model.with_coupling_strength(s), options.propagation)) -
           target_gain;
  };
  double lo = guess, hi = guess;
  double f_lo = residual(lo), f_hi = f_lo;
  const double step = 1.25;
  while (f_lo > 0.0) {
    lo /= step;
    if (lo < guess / options.max_bracket_factor) {
      throw CalibrationError("calibrate_gain: no bracket below the Magnus estimate");
    }
    f_lo = residual(lo);
  }
  while (f_hi < 0.0) {
    hi *= step;
    if (hi > guess * options.max_bracket_factor) {
      throw CalibrationError("calibrate_gain: no bracket above the Magnus estimate");
    }
    f_hi = residual(hi);
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;

  std::uintmax_t iters = static_cast<std::uintmax_t>(options.max_iterations);
  const double gtol = options.gain_tolerance;
  auto stop = [&](double a, double b) { return std::abs(b - a) <= 1e-12 * std::abs(a); };
  double fa = f_lo, fb = f_hi;
  std::pair<double, double> r;
  try {
    r = boost::math::tools::toms748_solve(residual, lo, hi, fa, fb, stop, iters);
  } catch (const std::exception& e) {
    throw CalibrationError(std::string("calibrate_gain: ") + e.what());
  }
  const double s = 0.5 * (r.first + r.second);
  if (std::abs(residual(s)) > gtol) {
    throw CalibrationError(fmt::format("calibrate_gain: residual above {:.1e} after {} iterations",
                                       gtol, iters));
  }
  return s;
}

}  // namespace mopa
