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

#ifndef MOPA_LINALG_HPP
#define MOPA_LINALG_HPP

#include <complex>

#include <Eigen/Dense>

namespace mopa {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Largest elementwise magnitude of m - m^T.
double asymmetry(const CMatrix& m);
double asymmetry(const RMatrix& m);

// Takagi factorisation J = W diag(values) W^T of a complex symmetric
// matrix, with W unitary and values sorted in descending order.
struct Takagi {
  CMatrix vectors;
  RVector values;
};

// Throws InputError when J is not square or |J - J^T| exceeds tolerance.
Takagi takagi_factor(const CMatrix& J, double symmetry_tolerance = 1e-10);

// Extends orthonormal columns to an n_total x n_total unitary matrix.
CMatrix unitary_completion(const CMatrix& columns, Index n_total);

// Rotates the global phase of v so its largest-magnitude entry is real and
// positive. Returns the phase factor that was removed (v_in = v_out * factor).
cplx fix_gauge(Eigen::Ref<CVector> v);

}  // namespace mopa

#endif  // MOPA_LINALG_HPP
