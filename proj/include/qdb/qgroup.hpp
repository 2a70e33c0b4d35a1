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

// Representation-level certificates for the A_u(Q) and B_u(F) relations and
// a truncated SU_q(2) ladder representation.
//
// A dilation-shaped matrix W (n x n blocks of size d) is read as the matrix
// u of a corepresentation whose entries are the blocks. Residuals that do
// not vanish on a truncation are described by their singular values so that
// defects confined to the cut-off edge can be told apart from genuine
// violations.

#include "qdb/reversal.hpp"

#include <string>
#include <vector>

namespace qdb {

struct RelationResidual {
  std::string name;
  ComplexMatrix matrix;
  double norm = 0.0;            // largest singular value
  Eigen::Index defect_rank = 0; // singular values above tolerance
  double off_defect = 0.0;      // largest singular value below tolerance
};

struct RelationReport {
  std::vector<RelationResidual> residuals;
  bool verdict = false;

  const RelationResidual* find(const std::string& name) const {
    for (const auto& r : residuals)
      if (r.name == name) return &r;
    return nullptr;
  }
};

inline RelationResidual describe_residual(std::string name, ComplexMatrix m, double tol) {
  RelationResidual r{std::move(name), std::move(m)};
  if (r.matrix.size() == 0) return r;
  Eigen::JacobiSVD<ComplexMatrix> svd(r.matrix);
  const RealVector& s = svd.singularValues();
  r.norm = s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol)
      ++r.defect_rank;
    else
      r.off_defect = std::max(r.off_defect, s(i));
  }
  return r;
}

namespace detail {

inline void finish(RelationReport& rep, double tol) {
  rep.verdict = true;
  for (const auto& r : rep.residuals)
    if (r.norm >= tol) rep.verdict = false;
}

inline Eigen::Index block_size(const ComplexMatrix& w, const ComplexMatrix& f) {
  require(f.rows() == f.cols() && f.rows() > 0 && w.rows() == w.cols() && w.rows() % f.rows() == 0,
          ErrorCode::dimension_mismatch, "W must be a square array of n x n blocks with F n x n");
  return w.rows() / f.rows();
}

}  // namespace detail

// W and (F (x) 1) W^c (F^{-1} (x) 1) both unitary.
inline RelationReport au_relations_check(const ComplexMatrix& w, const ComplexMatrix& f,
                                         double tol = Tolerances{}.residual) {
  const Eigen::Index d = detail::block_size(w, f);
  const ComplexMatrix wc = conjugate_representation(w, f, d);
  const ComplexMatrix one = identity(w.rows());
  RelationReport rep;
  rep.residuals.push_back(describe_residual("W*W-I", w.adjoint() * w - one, tol));
  rep.residuals.push_back(describe_residual("WW*-I", w * w.adjoint() - one, tol));
  rep.residuals.push_back(describe_residual("Wc*Wc-I", wc.adjoint() * wc - one, tol));
  rep.residuals.push_back(describe_residual("WcWc*-I", wc * wc.adjoint() - one, tol));
  detail::finish(rep, tol);
  return rep;
}

// A_u battery plus W = (F (x) 1) W^c (F^{-1} (x) 1) and F F^c scalar.
inline RelationReport bu_relations_check(const ComplexMatrix& w, const ComplexMatrix& f,
                                         double tol = Tolerances{}.residual) {
  RelationReport rep = au_relations_check(w, f, tol);
  const Eigen::Index d = detail::block_size(w, f);
  rep.residuals.push_back(describe_residual("W-Wc", w - conjugate_representation(w, f, d), tol));
  const ComplexMatrix ffc = f * f.conjugate();
  const cplx lambda = ffc.trace() / static_cast<double>(f.rows());
  ComplexMatrix scalar_defect = ffc - lambda * identity(f.rows());
  if (std::abs(lambda) > 0.0)
    scalar_defect /= std::abs(lambda);
  else
    scalar_defect = ffc + identity(f.rows());  // FF^c = 0 cannot be a nonzero scalar
  rep.residuals.push_back(describe_residual("FFc-scalar", scalar_defect, tol));
  detail::finish(rep, tol);
  return rep;
}

// rho_v = Q_v^t / Tr(Q_v) after trace balancing (the ratio is scale free).
inline StateDensity invariant_state(const ComplexMatrix& qv, bool normalize_first = true) {
  detail::require_square(qv, "Q_v");
  detail::require(is_hermitian(qv, 1e-10), ErrorCode::not_hermitian, "Q_v is not Hermitian");
  const auto eig = hermitian_eigen(qv);
  detail::require(eig.values.minCoeff() > Tolerances{}.rank * eig.values.maxCoeff(), ErrorCode::singular,
                  "Q_v is not positive definite");
  ComplexMatrix q = hermitian_part(qv);
  if (normalize_first) q *= trace_balance_scale(q);
  const ComplexMatrix rho = q.transpose() / q.trace().real();
  return StateDensity(hermitian_part(rho), 1e-10);
}

struct SUq2 {
  ComplexMatrix a;
  ComplexMatrix c;
  KrausSet kraus;    // {a, c}
  ComplexMatrix F;   // [[0, q], [-1, 0]]
  ComplexMatrix W;   // [[a, -q c^*], [c, a^*]], bath-major 2 x 2 blocks
};

// Truncated ladder representation: a e_k = sqrt(1 - q^{2k}) e_{k-1},
// c = diag(q^k), k = 0..N-1. The defining matrix satisfies W = (F (x) 1)
// W^c (F^{-1} (x) 1) exactly; unitarity fails only on e_{N-1}.
inline SUq2 suq2_generators(double q, Eigen::Index n_levels) {
  detail::require(q > 0.0 && q < 1.0, ErrorCode::invalid_kraus, "q must lie in (0, 1)");
  detail::require(n_levels >= 2, ErrorCode::dimension_mismatch, "truncation needs N >= 2");
  const Eigen::Index n = n_levels;
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  ComplexMatrix c = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    c(k, k) = std::pow(q, static_cast<double>(k));
    if (k > 0) a(k - 1, k) = std::sqrt(1.0 - std::pow(q, 2.0 * static_cast<double>(k)));
  }
  ComplexMatrix f(2, 2);
  f << 0.0, q, -1.0, 0.0;
  ComplexMatrix w(2 * n, 2 * n);
  w.block(0, 0, n, n) = a;
  w.block(0, n, n, n) = -q * c.adjoint();
  w.block(n, 0, n, n) = c;
  w.block(n, n, n, n) = a.adjoint();
  return {a, c, KrausSet({a, c}), f, w};
}

// W = [[A, -B^*], [B, A^*]] for commuting normal A, B with A^*A + B^*B = 1:
// A = diag(cos t_i e^{i u_i}), B = diag(sin t_i e^{i v_i}).
inline ComplexMatrix su2_form_dilation(const RealVector& theta, const RealVector& alpha, const RealVector& beta) {
  const Eigen::Index d = theta.size();
  detail::require(alpha.size() == d && beta.size() == d, ErrorCode::dimension_mismatch, "angle vectors differ in length");
  ComplexMatrix a = ComplexMatrix::Zero(d, d), b = ComplexMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = std::cos(theta(i)) * std::exp(cplx(0.0, alpha(i)));
    b(i, i) = std::sin(theta(i)) * std::exp(cplx(0.0, beta(i)));
  }
  ComplexMatrix w(2 * d, 2 * d);
  w.block(0, 0, d, d) = a;
  w.block(0, d, d, d) = -b.adjoint();
  w.block(d, 0, d, d) = b;
  w.block(d, d, d, d) = a.adjoint();
  return w;
}

struct FirstRowSphere {
  SphereCheck z_side;      // sum Q^{k,j} z_j^* z_k - 1
  SphereCheck kraus_side;  // sum Q^{k,j} z_j z_k^* - 1
  double q11_defect = 0.0;
  double first_word_defect = 0.0;
  bool hypotheses_ok = false;
};

// z_k = W_{0,k}; Q = F^*F. GH_m is spanned by the word products z_w.
inline FirstRowSphere first_row_q_sphere(const ComplexMatrix& w, const ComplexMatrix& f, int m,
                                         const Tolerances& tol = {}) {
  const Eigen::Index d = detail::block_size(w, f);
  const Eigen::Index n = f.rows();
  require_invertible(f, "F");
  std::vector<ComplexMatrix> z;
  for (Eigen::Index k = 0; k < n; ++k) z.push_back(block(w, 0, k, d));
  const ComplexMatrix q = f.adjoint() * f;
  const SubproductSystem s = subproduct_from_family(z, d, m, false, tol);
  const ComplexMatrix weights = sphere_weights(q, s.p(m), m, tol.rank);
  const ComplexMatrix qm = tensor_power(q, m, std::numeric_limits<std::size_t>::max());
  const double compat = spectral_norm(qm * s.p(m) - s.p(m) * qm);

  const auto zw = all_word_products(z, d, m, tol.max_dim);
  std::vector<ComplexMatrix> zw_adj;
  for (const auto& x : zw) zw_adj.push_back(x.adjoint());
  FirstRowSphere out;
  out.z_side = sphere_check_from_residual(weighted_sum(zw_adj, zw_adj, weights) - identity(d), compat, tol);
  out.kraus_side = sphere_check_from_residual(weighted_sum(zw, zw, weights) - identity(d), compat, tol);
  out.q11_defect = std::abs(q(0, 0) - cplx(1.0));
  out.first_word_defect = first_word_defect(s, m);
  out.hypotheses_ok = out.q11_defect < tol.residual && out.first_word_defect < tol.residual;
  return out;
}

}  // namespace qdb
