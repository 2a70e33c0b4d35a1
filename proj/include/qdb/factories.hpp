// Copyright 2026 The qdb Authors
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

#pragma once

// Example channels used by the CLI and the test suites.

#include "qdb/equilibrium.hpp"

namespace qdb {

struct ExampleChannel {
  KrausSet kraus;
  StateDensity rho0;
};

// Generalized amplitude damping with bath polarization p and damping gamma.
// Its fixed point is diag(p, 1 - p).
inline ExampleChannel gad_channel(double p, double gamma) {
  detail::require(p > 0.0 && p < 1.0 && gamma > 0.0 && gamma < 1.0, ErrorCode::invalid_kraus,
                  "gad needs p and gamma in (0, 1)");
  ComplexMatrix k1 = ComplexMatrix::Zero(2, 2), k2 = ComplexMatrix::Zero(2, 2);
  ComplexMatrix k3 = ComplexMatrix::Zero(2, 2), k4 = ComplexMatrix::Zero(2, 2);
  k1(0, 0) = std::sqrt(p);
  k1(1, 1) = std::sqrt(p * (1.0 - gamma));
  k2(0, 1) = std::sqrt(p * gamma);
  k3(0, 0) = std::sqrt((1.0 - p) * (1.0 - gamma));
  k3(1, 1) = std::sqrt(1.0 - p);
  k4(1, 0) = std::sqrt((1.0 - p) * gamma);
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = p;
  rho(1, 1) = 1.0 - p;
  return {KrausSet({k1, k2, k3, k4}), StateDensity(rho)};
}

// K_1 = diag(cos t, sin t), K_2 = diag(sin t, -cos t), rho0 = 1/2.
inline ExampleChannel commuting_db_channel(double theta) {
  ComplexMatrix k1 = ComplexMatrix::Zero(2, 2), k2 = ComplexMatrix::Zero(2, 2);
  k1(0, 0) = std::cos(theta);
  k1(1, 1) = std::sin(theta);
  k2(0, 0) = std::sin(theta);
  k2(1, 1) = -std::cos(theta);
  return {KrausSet({k1, k2}), StateDensity::maximally_mixed(2)};
}

// exp(-i H) for Hermitian H.
inline ComplexMatrix unitary_exp(const ComplexMatrix& h) {
  const auto eig = hermitian_eigen(h);
  ComplexVector phases(eig.values.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(cplx(0.0, -eig.values(i)));
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

// W = exp(-i A (x) B) with A on the system and B on the bath, Kraus operators
// from its first block-column. They are functions of A, hence commute.
inline KrausSet measurement_channel(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require(is_hermitian(a) && is_hermitian(b), ErrorCode::not_hermitian, "A and B must be Hermitian");
  const ComplexMatrix w = unitary_exp(tensor_product(b, a));
  return kraus_from_dilation(w, a.rows(), b.rows());
}

}  // namespace qdb
