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

#include "mopa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mopa/errors.hpp"

namespace mopa {

double asymmetry(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double asymmetry(const RMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

cplx fix_gauge(Eigen::Ref<CVector> v) {
  if (v.size() == 0) return {1.0, 0.0};
  Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  const double mag = std::abs(v(k));
  if (mag == 0.0) return {1.0, 0.0};
  const cplx factor = v(k) / mag;
  v /= factor;
  v(k) = cplx(std::abs(v(k)), 0.0);
  return factor;
}

CMatrix unitary_completion(const CMatrix& columns, Index n_total) {
  CMatrix out(n_total, n_total);
  Index filled = 0;
  auto try_add = [&](CVector v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < filled; ++k) v -= out.col(k).dot(v) * out.col(k);
    }
    const double nrm = v.norm();
    if (nrm < 0.5) return false;
    out.col(filled++) = v / nrm;
    return true;
  };
  for (Index k = 0; k < columns.cols() && filled < n_total; ++k) {
    if (!try_add(columns.col(k))) {
      throw NumericalError("unitary_completion: input columns are not orthonormal");
    }
  }
  for (Index e = 0; e < n_total && filled < n_total; ++e) {
    CVector v = CVector::Zero(n_total);
    v(e) = 1.0;
    try_add(v);
  }
  return out;
}

Takagi takagi_factor(const CMatrix& J, double symmetry_tolerance) {
  if (J.rows() != J.cols()) throw InputError("takagi_factor: matrix is not square");
  const Index n = J.rows();
  Takagi out;
  out.vectors = CMatrix::Identity(n, n);
  out.values = RVector::Zero(n);
  if (n == 0) return out;
  const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
  if (asymmetry(J) > symmetry_tolerance * scale) {
    throw InputError("takagi_factor: matrix is not symmetric");
  }
  const CMatrix Js = 0.5 * (J + J.transpose());

  // The real embedding [[A, B], [B, -A]] of J = A + iB has spectrum +-s_k.
  // An eigenvector (x, y) with eigenvalue s gives the Takagi vector x + iy.
  RMatrix H(2 * n, 2 * n);
  H << Js.real(), Js.imag(), Js.imag(), -Js.real();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("takagi_factor: eigensolver failed");

  const double tol = 64.0 * std::numeric_limits<double>::epsilon() * scale * static_cast<double>(n);
  CMatrix W(n, n);
  Index n_good = 0;
  for (Index k = 0; k < n; ++k) {
    const Index idx = 2 * n - 1 - k;
    const double s = es.eigenvalues()(idx);
    if (s <= tol) break;
    W.col(k) = es.eigenvectors().col(idx).head(n).cast<cplx>() +
               cplx(0.0, 1.0) * es.eigenvectors().col(idx).tail(n).cast<cplx>();
    W.col(k).normalize();
    out.values(k) = s;
    ++n_good;
  }
  // Null directions carry no information; any completion is valid.
  if (n_good < n) {
    W = unitary_completion(W.leftCols(n_good), n);
  }
  for (Index k = n_good; k < n; ++k) out.values(k) = 0.0;
  out.vectors = W;
  return out;
}

}  // namespace mopa
