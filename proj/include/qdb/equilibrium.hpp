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

// Correlation matrices of a reference state, rho0-orthogonal Kraus sets,
// multi-time correlations, the KMS functional and its modular flow.

#include "qdb/stinespring.hpp"

#include <vector>

namespace qdb {

class StateDensity {
 public:
  StateDensity() = default;

  explicit StateDensity(ComplexMatrix rho, double tol = 1e-12) : rho_(std::move(rho)) {
    detail::require_square(rho_, "density matrix");
    require_finite(rho_, "density matrix");
    detail::require(rho_.rows() > 0, ErrorCode::invalid_state, "empty density matrix");
    detail::require(hermiticity_residual(rho_) <= tol, ErrorCode::invalid_state, "density matrix is not Hermitian");
    detail::require(std::abs(rho_.trace() - cplx(1.0)) <= tol, ErrorCode::invalid_state,
                    "density matrix does not have unit trace");
    rho_ = hermitian_part(rho_);
    detail::require(hermitian_eigen(rho_).values.minCoeff() >= -tol, ErrorCode::invalid_state,
                    "density matrix has a negative eigenvalue");
  }

  static StateDensity maximally_mixed(Eigen::Index d) {
    return StateDensity(identity(d) / static_cast<double>(d));
  }

  Eigen::Index d() const { return rho_.rows(); }
  const ComplexMatrix& rho() const { return rho_; }

 private:
  ComplexMatrix rho_;
};

enum class Normalization { trace_balanced, first_entry, raw };

inline const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::trace_balanced: return "trace_balanced";
    case Normalization::first_entry: return "first_entry";
    case Normalization::raw: return "raw";
  }
  return "unknown";
}

struct CorrelationData {
  ComplexMatrix Q;
  Normalization normalization = Normalization::raw;
  ComplexMatrix raw;  // q_jk = Tr(K_j rho0 K_k^*)
  double scale = 1.0; // Q = scale * raw
};

// The scalar s with Tr(s q) = Tr((s q)^{-1}).
// Extended precision: Tr(q^{-1}) loses cond(q) * eps in double.
inline double trace_balance_scale(const ComplexMatrix& q) {
  using Wide = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
  const Wide w = q.cast<std::complex<long double>>();
  const long double inv_trace = w.partialPivLu().inverse().trace().real();
  return static_cast<double>(std::sqrt(inv_trace / w.trace().real()));
}

inline CorrelationData normalize(const ComplexMatrix& raw, Normalization norm) {
  CorrelationData out;
  out.raw = raw;
  out.normalization = norm;
  switch (norm) {
    case Normalization::trace_balanced: out.scale = trace_balance_scale(raw); break;
    case Normalization::first_entry: out.scale = 1.0 / raw(0, 0).real(); break;
    case Normalization::raw: out.scale = 1.0; break;
  }
  out.Q = out.scale * raw;
  return out;
}

// Wraps a user-supplied Q (declared normalization is trusted, not enforced).
inline CorrelationData correlation_from_matrix(const ComplexMatrix& q, Normalization norm) {
  detail::require_square(q, "Q");
  detail::require(is_hermitian(q, 1e-10), ErrorCode::not_hermitian, "Q is not Hermitian");
  CorrelationData out;
  out.Q = hermitian_part(q);
  out.raw = out.Q / out.Q.trace().real();
  out.scale = out.Q.trace().real();
  out.normalization = norm;
  return out;
}

namespace detail {

// G_jk = Tr(L K_j R K_k^*) for all pairs, as one product of stacked vectors.
inline ComplexMatrix sandwich_traces(const std::vector<ComplexMatrix>& ops, const ComplexMatrix& left,
                                     const ComplexMatrix& right) {
  const Eigen::Index count = static_cast<Eigen::Index>(ops.size());
  const Eigen::Index len = ops.front().size();
  ComplexMatrix a(len, count), b(len, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const ComplexMatrix lr = left * ops[static_cast<std::size_t>(j)] * right;
    a.col(j) = Eigen::Map<const ComplexVector>(lr.data(), len);
    b.col(j) = Eigen::Map<const ComplexVector>(ops[static_cast<std::size_t>(j)].data(), len);
  }
  return (b.adjoint() * a).transpose();
}

inline void require_state_dim(const KrausSet& k, const StateDensity& rho0) {
  require(rho0.d() == k.d(), ErrorCode::dimension_mismatch, "reference state has the wrong dimension");
}

}  // namespace detail

inline ComplexMatrix raw_correlation(const KrausSet& k, const StateDensity& rho0) {
  detail::require_state_dim(k, rho0);
  return hermitian_part(detail::sandwich_traces(k.ops(), identity(k.d()), rho0.rho()));
}

inline CorrelationData correlation_matrix(const KrausSet& k, const StateDensity& rho0, Normalization norm,
                                          const Tolerances& tol = {}) {
  const ComplexMatrix q = raw_correlation(k, rho0);
  for (Eigen::Index j = 0; j < q.rows(); ++j)
    detail::require(q(j, j).real() > tol.rank, ErrorCode::singular,
                    "K_" + std::to_string(j) + " rho0 K_" + std::to_string(j) + "^* vanishes");
  const auto eig = hermitian_eigen(q);
  detail::require(eig.values.minCoeff() > tol.rank * eig.values.maxCoeff(), ErrorCode::singular,
                  "correlation matrix is singular");
  return normalize(q, norm);
}

struct Orthogonalized {
  KrausSet kraus;
  ComplexMatrix mixing;   // K'_j = sum_k conj(mixing(k, j)) K_k
  RealVector lambdas;     // descending; diagonal of the new raw correlation
  CorrelationData correlation;
};

namespace detail {

inline void fix_phase(ComplexVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-12) {
      v *= std::conj(v(i)) / std::abs(v(i));
      return;
    }
}

}  // namespace detail

// Diagonalizes the correlation matrix by a unitary remix. Within a degenerate
// eigenspace P the first basis vector is the normalized P t, t_k = Tr(rho0 K_k),
// so that at most one operator per eigenspace carries a mean; the rest
// follow by Gram-Schmidt on P e_0, P e_1, ... Phases make each nonzero mean
// real positive; otherwise the first nonzero entry of the column is.
inline Orthogonalized orthogonalize_kraus(const KrausSet& k, const StateDensity& rho0,
                                          Normalization norm = Normalization::trace_balanced,
                                          const Tolerances& tol = {}) {
  const ComplexMatrix q = correlation_matrix(k, rho0, Normalization::raw, tol).raw;
  const auto eig = hermitian_eigen(q);
  const Eigen::Index n = k.n();
  ComplexVector means(n);
  for (Eigen::Index j = 0; j < n; ++j) means(j) = (rho0.rho() * k[static_cast<std::size_t>(j)]).trace();
  const double top = eig.values.cwiseAbs().maxCoeff();
  const double cluster_tol = tol.rank * std::max(top, 1.0);

  ComplexMatrix u(n, n);
  RealVector lambdas(n);
  Eigen::Index filled = 0;
  Eigen::Index hi = n - 1;
  while (hi >= 0) {
    Eigen::Index lo = hi;
    while (lo > 0 && std::abs(eig.values(lo - 1) - eig.values(hi)) <= cluster_tol) --lo;
    const Eigen::Index dim = hi - lo + 1;
    const ComplexMatrix basis = eig.vectors.middleCols(lo, dim);
    std::vector<ComplexVector> chosen;
    if (dim == 1) {
      chosen.push_back(basis.col(0));
    } else {
      const ComplexMatrix proj = basis * basis.adjoint();
      std::vector<ComplexVector> candidates;
      const ComplexVector pt = proj * means;
      if (pt.norm() > 1e-10) candidates.push_back(pt);
      for (Eigen::Index i = 0; i < n; ++i) candidates.push_back(proj.col(i));
      for (ComplexVector v : candidates) {
        for (const auto& c : chosen) v -= c.dot(v) * c;
        for (const auto& c : chosen) v -= c.dot(v) * c;
        if (v.norm() > 1e-8) chosen.push_back(v / v.norm());
        if (static_cast<Eigen::Index>(chosen.size()) == dim) break;
      }
    }
    const double mean_value = eig.values.segment(lo, dim).mean();
    for (auto& v : chosen) {
      const cplx mean = v.dot(means);
      if (std::abs(mean) > 1e-10)
        v *= mean / std::abs(mean);
      else
        detail::fix_phase(v);
      u.col(filled) = v;
      lambdas(filled) = mean_value;
      ++filled;
    }
    hi = lo - 1;
  }

  std::vector<ComplexMatrix> ops;
  ops.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    ComplexMatrix op = ComplexMatrix::Zero(k.d(), k.d());
    for (Eigen::Index r = 0; r < n; ++r) op += std::conj(u(r, j)) * k[static_cast<std::size_t>(r)];
    ops.push_back(std::move(op));
  }
  Orthogonalized out{KrausSet(std::move(ops)), u, lambdas, {}};
  const ComplexMatrix q2 = raw_correlation(out.kraus, rho0);
  for (Eigen::Index j = 0; j < n; ++j) out.lambdas(j) = q2(j, j).real();
  out.correlation = normalize(q2, norm);
  return out;
}

// |Tr(rho0 K_j)| per operator.
inline std::vector<double> zero_mean_check(const KrausSet& k, const StateDensity& rho0) {
  detail::require_state_dim(k, rho0);
  std::vector<double> out;
  for (const auto& op : k.ops()) out.push_back(std::abs((rho0.rho() * op).trace()));
  return out;
}

// At most one operator with a nonvanishing mean.
inline bool zero_mean_passes(const std::vector<double>& residuals, double tol = Tolerances{}.residual) {
  return std::count_if(residuals.begin(), residuals.end(), [&](double r) { return r > tol; }) <= 1;
}

// ---------------------------------------------------------------------------
// Multi-time correlations

enum class Ordering { normal, antinormal };

inline const char* to_string(Ordering o) { return o == Ordering::normal ? "normal" : "antinormal"; }

// Q^{(x)m} p_m and its trace over the full tensor power.
struct LevelCorrelation {
  ComplexMatrix qm;
  double trace = 0.0;
};

inline LevelCorrelation level_correlation(const CorrelationData& qd, const SubproductSystem& s, int m) {
  LevelCorrelation out;
  out.qm = tensor_power(qd.Q, m, std::numeric_limits<std::size_t>::max()) * s.p(m);
  out.trace = out.qm.trace().real();
  return out;
}

struct PhiSymmetricCheck {
  double residual = 0.0;
  double compat_residual = 0.0;
  bool hypothesis_ok = false;
};

// normal:     max |Tr(K_j rho0 K_k^*) - (Q_m)_jk / Tr(Q_m)|
// antinormal: max |Tr(rho0 K_j K_k^*) - (p_m)_jk / Tr(Q_m)|
inline PhiSymmetricCheck check_phi_symmetric(const KrausSet& k, const StateDensity& rho0, const CorrelationData& qd,
                                             const SubproductSystem& s, int m, Ordering ordering,
                                             const Tolerances& tol = {}) {
  detail::require_state_dim(k, rho0);
  PhiSymmetricCheck out;
  out.compat_residual = check_Q_compatibility(s, qd.Q, m);
  out.hypothesis_ok = out.compat_residual < tol.residual;
  const auto products = all_word_products(k.ops(), k.d(), m, tol.max_dim);
  const auto lc = level_correlation(qd, s, m);
  ComplexMatrix observed, expected;
  if (ordering == Ordering::normal) {
    observed = detail::sandwich_traces(products, identity(k.d()), rho0.rho());
    expected = lc.qm / lc.trace;
  } else {
    observed = detail::sandwich_traces(products, rho0.rho(), identity(k.d()));
    expected = s.p(m) / lc.trace;
  }
  out.residual = max_abs_entry(observed - expected);
  return out;
}

// Coefficients c_r with sigma_t(K_word) = sum_r c_r K_r, taken from the row
// of (Q^{-it})^{(x)m}. When Q^{(x)m} commutes with p_m this agrees, as an
// operator, with the flow of Q_m restricted to GH_m. Complex t continues
// analytically; t = -i gives the row of (Q^{(x)m})^{-1}.
inline ComplexVector modular_flow(const CorrelationData& qd, const SubproductSystem& s, const Word& word, cplx t,
                                  const Tolerances& tol = {}) {
  const int m = static_cast<int>(word.size());
  const double compat = check_Q_compatibility(s, qd.Q, m);
  detail::require(compat < tol.residual, ErrorCode::hypothesis_failed,
                  "Q^{(x)m} does not preserve GH_m at level " + std::to_string(m));
  const ComplexMatrix f = matrix_power_analytic(qd.Q, cplx(0.0, -1.0) * t, tol.rank);
  const ComplexMatrix fm = tensor_power(f, m, std::numeric_limits<std::size_t>::max());
  return fm.row(static_cast<Eigen::Index>(word_index(word, s.n))).transpose();
}

inline ComplexMatrix flow_operator(const std::vector<ComplexMatrix>& products, const ComplexVector& coeffs) {
  ComplexMatrix out = ComplexMatrix::Zero(products.front().rows(), products.front().cols());
  for (Eigen::Index r = 0; r < coeffs.size(); ++r)
    if (coeffs(r) != cplx(0.0)) out += coeffs(r) * products[static_cast<std::size_t>(r)];
  return out;
}

// normal: omega_Q(K_j^* K_k) = (Q_m)_{kj} / Tr(Q_m)
// antinormal: omega_Q(K_j K_k^*) = (p_m)_{jk} / Tr(Q_m)
inline cplx kms_state_eval(const CorrelationData& qd, const SubproductSystem& s, const Word& j, const Word& k,
                           Ordering ordering) {
  if (j.size() != k.size()) return 0.0;
  const int m = static_cast<int>(j.size());
  const auto lc = level_correlation(qd, s, m);
  const auto jj = static_cast<Eigen::Index>(word_index(j, s.n));
  const auto kk = static_cast<Eigen::Index>(word_index(k, s.n));
  if (ordering == Ordering::normal) return lc.qm(kk, jj) / lc.trace;
  return s.p(m)(jj, kk) / lc.trace;
}

struct KmsCheck {
  double residual = 0.0;
  bool hypothesis_ok = true;  // Q compatible at every level used
};

// max over |j| = |k| <= m of |Tr(rho0 K_j K_k^*) - Tr(rho0 K_k^* sigma_{-i}(K_j))|.
inline KmsCheck kms_condition_residual(const KrausSet& k, const StateDensity& rho0, const CorrelationData& qd,
                                       const SubproductSystem& s, int m, const Tolerances& tol = {}) {
  detail::require_state_dim(k, rho0);
  KmsCheck out;
  const ComplexMatrix qinv = matrix_power_analytic(qd.Q, -1.0, tol.rank);
  for (int level = 1; level <= m; ++level) {
    if (check_Q_compatibility(s, qd.Q, level) >= tol.residual) out.hypothesis_ok = false;
    const auto products = all_word_products(k.ops(), k.d(), level, tol.max_dim);
    const ComplexMatrix anti = detail::sandwich_traces(products, rho0.rho(), identity(k.d()));
    const ComplexMatrix normal = detail::sandwich_traces(products, identity(k.d()), rho0.rho());
    const ComplexMatrix flow = tensor_power(qinv, level, std::numeric_limits<std::size_t>::max());
    out.residual = std::max(out.residual, max_abs_entry(anti - flow * normal));
  }
  return out;
}

// Fixed point of the Schrodinger map with the largest overlap on the
// identity, normalized to unit trace.
inline StateDensity stationary_state(const KrausSet& k) {
  const Eigen::Index d = k.d();
  ComplexMatrix super = ComplexMatrix::Zero(d * d, d * d);
  for (const auto& op : k.ops()) super += tensor_product(op.conjugate(), op, std::numeric_limits<std::size_t>::max());
  super -= identity(d * d);
  Eigen::JacobiSVD<ComplexMatrix> svd(super, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, sv(0));
  Eigen::Index first_null = d * d - 1;
  while (first_null > 0 && sv(first_null - 1) < cut) --first_null;
  // Several fixed points: project vec(1) onto their span.
  const ComplexMatrix null = svd.matrixV().rightCols(d * d - first_null);
  ComplexVector v = null * (null.adjoint() * identity(d).reshaped());
  if (v.norm() < 1e-8) v = svd.matrixV().col(d * d - 1);
  ComplexMatrix rho = Eigen::Map<const ComplexMatrix>(v.data(), d, d);
  rho = hermitian_part(rho / rho.trace());
  return StateDensity(rho, 1e-9);
}

}  // namespace qdb
