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

// Q-sphere residuals, reversed dilations and Kraus sets, Crooks duals,
// the detailed-balance pipeline, and the classical Markov-chain baseline.

#include "qdb/equilibrium.hpp"
#include "qdb/report.hpp"

#include <string>
#include <vector>

namespace qdb {

// ---------------------------------------------------------------------------
// Q-sphere condition

// Matrix Q^{k,j}: the inverse of p_m Q^{(x)m} p_m on the range of p_m.
inline ComplexMatrix sphere_weights(const ComplexMatrix& q, const ComplexMatrix& p, int m,
                                    double rank_tol = Tolerances{}.rank) {
  const ComplexMatrix qm = tensor_power(q, m, std::numeric_limits<std::size_t>::max());
  return hermitian_pinv(p * qm * p, rank_tol);
}

// sum_{j,k} weights(k, j) A_j B_k^*
inline ComplexMatrix weighted_sum(const std::vector<ComplexMatrix>& a, const std::vector<ComplexMatrix>& b,
                                  const ComplexMatrix& weights) {
  const Eigen::Index d = a.front().rows();
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  const Eigen::Index count = static_cast<Eigen::Index>(a.size());
  for (Eigen::Index k = 0; k < count; ++k) {
    ComplexMatrix mixed = ComplexMatrix::Zero(d, d);
    for (Eigen::Index j = 0; j < count; ++j)
      if (weights(k, j) != cplx(0.0)) mixed += weights(k, j) * a[static_cast<std::size_t>(j)];
    out += mixed * b[static_cast<std::size_t>(k)].adjoint();
  }
  return out;
}

struct SphereCheck {
  double residual = 0.0;          // spectral norm
  double frobenius = 0.0;
  Projector defect_support;       // eigenvectors of the residual above tolerance
  double compat_residual = 0.0;
  bool hypothesis_ok = false;
};

inline SphereCheck sphere_check_from_residual(const ComplexMatrix& r, double compat, const Tolerances& tol) {
  SphereCheck out;
  out.residual = spectral_norm(r);
  out.frobenius = r.norm();
  out.defect_support = spectral_support(hermitian_part(r), tol.residual);
  out.compat_residual = compat;
  out.hypothesis_ok = compat < tol.residual;
  return out;
}

// || sum Q^{k,j} K_j K_k^* - 1 || over words of length m.
inline SphereCheck q_sphere_residual(const KrausSet& k, const CorrelationData& qd, const SubproductSystem& s, int m,
                                     const Tolerances& tol = {}) {
  const double compat = check_Q_compatibility(s, qd.Q, m);
  const ComplexMatrix weights = sphere_weights(qd.Q, s.p(m), m, tol.rank);
  const auto products = all_word_products(k.ops(), k.d(), m, tol.max_dim);
  const ComplexMatrix r = weighted_sum(products, products, weights) - identity(k.d());
  return sphere_check_from_residual(r, compat, tol);
}

// ---------------------------------------------------------------------------
// Reversed dilation and Kraus sets

inline void require_invertible(const ComplexMatrix& f, const char* what) {
  detail::require_square(f, what);
  Eigen::JacobiSVD<ComplexMatrix> svd(f);
  const auto& sv = svd.singularValues();
  detail::require(sv(0) > 0.0 && sv(sv.size() - 1) > 1e-12 * sv(0), ErrorCode::singular,
                  std::string(what) + " is singular");
}

// (F (x) 1) W^c (F^{-1} (x) 1), bath-major.
inline ComplexMatrix conjugate_representation(const ComplexMatrix& w, const ComplexMatrix& f, Eigen::Index d) {
  require_invertible(f, "F");
  detail::require(w.rows() == f.rows() * d && w.cols() == w.rows(), ErrorCode::dimension_mismatch,
                  "W and F have incompatible shapes");
  return bath_operator(f, d) * block_conjugate(w, d) * bath_operator(f.inverse(), d);
}

struct ReversedUnitary {
  ComplexMatrix Wbar;
  double unitarity_residual = 0.0;
};

inline ReversedUnitary reversed_unitary(const ComplexMatrix& w, const ComplexMatrix& f, Eigen::Index d,
                                        Eigen::Index n, const Tolerances& tol = {}) {
  detail::require(w.rows() == d * n && w.cols() == d * n && f.rows() == n, ErrorCode::dimension_mismatch,
                  "reversed_unitary: W must be (dn) x (dn) and F n x n");
  detail::require(unitarity_residual(w) < tol.residual, ErrorCode::not_unitary, "reversed_unitary: W is not unitary");
  ReversedUnitary out;
  out.Wbar = conjugate_representation(w, f, d);
  out.unitarity_residual = spectral_norm(out.Wbar.adjoint() * out.Wbar - identity(w.rows()));
  return out;
}

struct ReversedKraus {
  KrausSet kraus;
  Classification classification = Classification::completely_positive;
};

// K~_k = Q_kk^{-1/2} K_k^*, with Q diagonal and Q_11 = 1.
inline ReversedKraus reversed_kraus(const KrausSet& k, const CorrelationData& qd, const Tolerances& tol = {}) {
  const ComplexMatrix& q = qd.Q;
  detail::require(q.rows() == k.n(), ErrorCode::dimension_mismatch, "Q has the wrong dimension");
  ComplexMatrix off = q;
  off.diagonal().setZero();
  detail::require(max_abs_entry(off) <= tol.residual * std::max(1.0, max_abs_entry(q)), ErrorCode::hypothesis_failed,
                  "reversed_kraus needs a diagonal Q; orthogonalize the Kraus set first");
  detail::require(std::abs(q(0, 0) - cplx(1.0)) <= tol.residual, ErrorCode::hypothesis_failed,
                  "reversed_kraus needs the normalization Q_11 = 1");
  std::vector<ComplexMatrix> ops;
  for (Eigen::Index j = 0; j < k.n(); ++j) {
    const double qjj = q(j, j).real();
    detail::require(qjj > tol.rank, ErrorCode::singular, "Q has a vanishing diagonal entry");
    ops.push_back(k[static_cast<std::size_t>(j)].adjoint() / std::sqrt(qjj));
  }
  ReversedKraus out{KrausSet(std::move(ops)), Classification::completely_positive};
  out.classification = classify(out.kraus, tol.residual);
  return out;
}

// K~_j = rho0^{1/2} K_j^* rho0^{-1/2}
inline KrausSet crooks_dual(const KrausSet& k, const StateDensity& rho0, const Tolerances& tol = {}) {
  detail::require(rho0.d() == k.d(), ErrorCode::dimension_mismatch, "reference state has the wrong dimension");
  const auto eig = hermitian_eigen(rho0.rho());
  detail::require(eig.values.minCoeff() > tol.rank, ErrorCode::singular, "crooks_dual needs an invertible rho0");
  const ComplexMatrix half = matrix_power_analytic(rho0.rho(), 0.5, tol.rank);
  const ComplexMatrix inv_half = matrix_power_analytic(rho0.rho(), -0.5, tol.rank);
  std::vector<ComplexMatrix> ops;
  for (const auto& op : k.ops()) ops.push_back(half * op.adjoint() * inv_half);
  return KrausSet(std::move(ops));
}

// max over words |w| <= m of |Tr(rho0 Kb_rev(w)^* Kb_rev(w)) - Tr(rho0 K_w^* K_w)|,
// where rev(w) reads w backwards.
inline double crooks_check(const KrausSet& k, const KrausSet& kbar, const StateDensity& rho0, int m,
                           const Tolerances& tol = {}) {
  detail::require(k.n() == kbar.n() && k.d() == kbar.d(), ErrorCode::dimension_mismatch,
                  "crooks_check: Kraus sets differ in shape");
  detail::require(rho0.d() == k.d(), ErrorCode::dimension_mismatch, "reference state has the wrong dimension");
  double worst = 0.0;
  const ComplexMatrix& rho = rho0.rho();
  for (int level = 1; level <= m; ++level) {
    const auto fwd = all_word_products(k.ops(), k.d(), level, tol.max_dim);
    const auto bwd = all_word_products(kbar.ops(), k.d(), level, tol.max_dim);
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      const Word w = word_at(i, k.n(), level);
      const auto& rb = bwd[word_index(reversed(w), k.n())];
      const cplx lhs = (rho * rb.adjoint() * rb).trace();
      const cplx rhs = (rho * fwd[i].adjoint() * fwd[i]).trace();
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Time-reversal invariance

struct TimeReversalResult {
  bool invariant = false;
  double distance = -1.0;            // Choi distance, -1 when the reversal is not a channel
  double unitarity_residual = 0.0;
  bool commuting_completion = false; // which completion of V produced W
};

// Builds the reversed channel from the first block-column of
// (F (x) 1) W^c (F^{-1} (x) 1) for the completion W of dilation_from_kraus.
// The reversed channel may depend on that completion.
inline TimeReversalResult time_reversal_invariance(const KrausSet& k, const ComplexMatrix& f,
                                                   const Tolerances& tol = {}) {
  const Dilation dil = dilation_from_kraus(k, tol.residual);
  const Eigen::Index d = k.d();
  const Eigen::Index n = k.n();
  const ReversedUnitary rev = reversed_unitary(dil.W, f, d, n, tol);
  TimeReversalResult out;
  out.unitarity_residual = rev.unitarity_residual;
  out.commuting_completion = dil.commuting_normal;
  if (rev.unitarity_residual >= tol.residual) return out;
  std::vector<ComplexMatrix> ops;
  for (Eigen::Index j = 0; j < n; ++j) {
    ComplexMatrix b = block(rev.Wbar, j, 0, d);
    if (b.norm() > 1e-13) ops.push_back(std::move(b));
  }
  out.distance = channel_distance(KrausSet(std::move(ops)), k);
  out.invariant = out.distance < tol.residual;
  return out;
}

// ---------------------------------------------------------------------------
// Detailed-balance pipeline

struct VerdictOptions {
  int max_level = 4;
  Tolerances tol;
};

struct DetailedBalanceResult {
  AnalysisReport report;
  Orthogonalized orth;
  CorrelationData first_entry;
};

namespace detail {

inline std::vector<std::vector<double>> to_rows(const ComplexMatrix& m) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// Orthogonalizes with respect to rho0, then checks, level by level, Q
// compatibility, the sphere condition and both multi-time orderings, and
// finally the KMS identity up to max_level. Q is trace-balanced.
inline DetailedBalanceResult detailed_balance_verdict(const KrausSet& k, const StateDensity& rho0,
                                                      const VerdictOptions& opt = {}) {
  const Tolerances& tol = opt.tol;
  DetailedBalanceResult out;
  AnalysisReport& rep = out.report;
  rep.tolerances = tol;
  rep.max_level = opt.max_level;

  const Classification cls = classify(k, tol.residual);
  rep.classification = to_string(cls);
  {
    CheckRecord rec{"channel", 0};
    rec.residuals.push_back({"unital", k.unital_residual()});
    rec.residuals.push_back({"cotrace", k.cotrace_residual()});
    rec.tolerance = tol.residual;
    rec.verdict = is_channel(cls);
    if (!rec.verdict) rec.reason = "not_channel";
    rep.add(rec);
  }
  if (!is_channel(cls)) return out;

  try {
    out.orth = orthogonalize_kraus(k, rho0, Normalization::trace_balanced, tol);
  } catch (const Error& e) {
    CheckRecord rec{"correlation", 1};
    rec.verdict = false;
    rec.reason = "correlation_singular";
    rec.note = e.what();
    rep.add(rec);
    return out;
  }
  const KrausSet& ko = out.orth.kraus;
  const CorrelationData& qd = out.orth.correlation;
  out.first_entry = normalize(qd.raw, Normalization::first_entry);
  rep.lambdas.assign(out.orth.lambdas.data(), out.orth.lambdas.data() + out.orth.lambdas.size());
  rep.q_trace_balanced = detail::to_rows(qd.Q);
  rep.q_first_entry = detail::to_rows(out.first_entry.Q);
  rep.trace_balance_scale = qd.scale;
  {
    CheckRecord rec{"zero_mean", 1};
    const auto means = zero_mean_check(ko, rho0);
    for (std::size_t j = 0; j < means.size(); ++j) rec.residuals.push_back({"mean_" + std::to_string(j), means[j]});
    rec.tolerance = tol.residual;
    rec.verdict = zero_mean_passes(means, tol.residual);
    rec.informational = true;
    if (!rec.verdict) rec.reason = "nonzero_means";
    rep.add(rec);
  }

  const SubproductSystem s = build_subproduct(ko, opt.max_level, tol);
  for (int m = 1; m <= opt.max_level; ++m) rep.ranks.push_back(s.rank(m));

  for (int m = 1; m <= opt.max_level; ++m) {
    const double compat = check_Q_compatibility(s, qd.Q, m);
    {
      CheckRecord rec{"q_compat", m};
      rec.residuals.push_back({"commutator", compat});
      rec.tolerance = tol.residual;
      rec.verdict = compat < tol.residual;
      if (!rec.verdict) rec.reason = "q_compat";
      rep.add(rec);
    }
    {
      const SphereCheck sc = q_sphere_residual(ko, qd, s, m, tol);
      CheckRecord rec{"q_sphere", m};
      rec.residuals.push_back({"spectral", sc.residual});
      rec.residuals.push_back({"frobenius", sc.frobenius});
      rec.tolerance = tol.residual;
      rec.defect_rank = sc.defect_support.rank;
      rec.hypotheses.push_back({"q_compatible", sc.hypothesis_ok});
      rec.verdict = sc.residual < tol.residual;
      if (!rec.verdict) rec.reason = "q_sphere";
      rep.add(rec);
    }
    for (Ordering o : {Ordering::normal, Ordering::antinormal}) {
      const PhiSymmetricCheck pc = check_phi_symmetric(ko, rho0, qd, s, m, o, tol);
      CheckRecord rec{std::string("phi_symmetric_") + to_string(o), m};
      rec.residuals.push_back({"max_entry", pc.residual});
      rec.tolerance = tol.residual;
      rec.hypotheses.push_back({"q_compatible", pc.hypothesis_ok});
      rec.verdict = pc.residual < tol.residual;
      if (!rec.verdict) rec.reason = "phi_symmetric";
      rep.add(rec);
    }
  }
  {
    const KmsCheck kc = kms_condition_residual(ko, rho0, qd, s, opt.max_level, tol);
    CheckRecord rec{"kms", opt.max_level};
    rec.residuals.push_back({"max_entry", kc.residual});
    rec.tolerance = tol.residual;
    rec.hypotheses.push_back({"q_compatible", kc.hypothesis_ok});
    rec.verdict = kc.residual < tol.residual;
    if (!rec.verdict) rec.reason = "kms";
    rep.add(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classical chains

class ClassicalChain {
 public:
  ClassicalChain(Eigen::MatrixXd m, Eigen::VectorXd pi, double tol = 1e-10) : m_(std::move(m)), pi_(std::move(pi)) {
    detail::require(m_.rows() == m_.cols() && m_.rows() == pi_.size() && pi_.size() > 0,
                    ErrorCode::dimension_mismatch, "chain: M must be n x n and pi of length n");
    detail::require(m_.allFinite() && pi_.allFinite(), ErrorCode::non_finite, "chain has NaN/Inf entries");
    detail::require(m_.minCoeff() >= -tol, ErrorCode::invalid_state, "chain has negative transition probabilities");
    for (Eigen::Index k = 0; k < m_.cols(); ++k)
      detail::require(std::abs(m_.col(k).sum() - 1.0) < tol, ErrorCode::invalid_state,
                      "column " + std::to_string(k) + " of M does not sum to one");
    detail::require(pi_.minCoeff() > 0.0, ErrorCode::singular, "stationary vector has a zero entry");
    detail::require(std::abs(pi_.sum() - 1.0) < tol, ErrorCode::invalid_state, "stationary vector does not sum to one");
    detail::require((m_ * pi_ - pi_).cwiseAbs().maxCoeff() < tol, ErrorCode::invalid_state, "M pi != pi");
  }

  Eigen::Index n() const { return m_.rows(); }
  const Eigen::MatrixXd& M() const { return m_; }
  const Eigen::VectorXd& pi() const { return pi_; }

 private:
  Eigen::MatrixXd m_;
  Eigen::VectorXd pi_;
};

struct ClassicalReversal {
  Eigen::MatrixXd Mhat;
  bool db = false;
  double residual = 0.0;  // max |M_jk pi_k - M_kj pi_j|
};

// Mhat = diag(pi) M^T diag(pi)^{-1}: the column-stochastic reversal with the
// same stationary vector.
inline ClassicalReversal classical_reverse(const ClassicalChain& c, double tol = Tolerances{}.residual) {
  const Eigen::VectorXd& pi = c.pi();
  ClassicalReversal out;
  out.Mhat = pi.asDiagonal() * c.M().transpose() * pi.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd flux = c.M() * pi.asDiagonal();
  out.residual = (flux - flux.transpose()).cwiseAbs().maxCoeff();
  out.db = (out.Mhat - c.M()).cwiseAbs().maxCoeff() < tol;
  return out;
}

}  // namespace qdb
