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

// Dense complex linear algebra shared by the rest of the library.
//
// Conventions:
//   * Matrices are Eigen::MatrixXcd. Tensor products use Kronecker order with
//     the left factor's index most significant, so e_j (x) e_k sits at j*n+k.
//   * Operators on a system space H_0 coupled to a bath C^n are stored
//     bath-major: block (j,k) of a (dn)x(dn) matrix is the d x d operator
//     W_{j,k}. In this layout A (x) 1 is kron(I_n, A) and 1 (x) F is
//     kron(F, I_d).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdb {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class ErrorCode {
  dimension_mismatch,
  budget_exceeded,
  not_hermitian,
  singular,
  not_isometry,
  not_unitary,
  invalid_kraus,
  invalid_state,
  level_out_of_range,
  non_finite,
  hypothesis_failed,
  parse_error,
  unknown_example,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::not_hermitian: return "not_hermitian";
    case ErrorCode::singular: return "singular";
    case ErrorCode::not_isometry: return "not_isometry";
    case ErrorCode::not_unitary: return "not_unitary";
    case ErrorCode::invalid_kraus: return "invalid_kraus";
    case ErrorCode::invalid_state: return "invalid_state";
    case ErrorCode::level_out_of_range: return "level_out_of_range";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::hypothesis_failed: return "hypothesis_failed";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::unknown_example: return "unknown_example";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Numerical thresholds. `rank` is relative to the largest singular value or
// eigenvalue; `residual` is the absolute bound used for pass/fail verdicts.
struct Tolerances {
  double rank = 1e-9;
  double residual = 1e-8;
  std::size_t max_dim = 4096;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

inline void require_square(const ComplexMatrix& m, const char* what) {
  require(m.rows() == m.cols(), ErrorCode::dimension_mismatch,
          std::string(what) + " must be square, got " + std::to_string(m.rows()) + "x" +
              std::to_string(m.cols()));
}

}  // namespace detail

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const cplx z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline void require_finite(const ComplexMatrix& m, const char* what) {
  detail::require(all_finite(m), ErrorCode::non_finite, std::string(what) + " has NaN/Inf entries");
}

inline ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

// Largest singular value.
inline double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

inline double frobenius_norm(const ComplexMatrix& m) { return m.norm(); }

inline double max_abs_entry(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_residual(const ComplexMatrix& m) {
  return (m - m.adjoint()).norm();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  return hermiticity_residual(m) <= tol * std::max(1.0, m.norm());
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

inline double unitarity_residual(const ComplexMatrix& u) {
  return spectral_norm(u.adjoint() * u - identity(u.cols()));
}

// ---------------------------------------------------------------------------
// Tensor products

inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b,
                                    std::size_t max_dim = Tolerances{}.max_dim) {
  const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
  const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
  detail::require(rows <= max_dim && cols <= max_dim, ErrorCode::budget_exceeded,
                  "tensor product of size " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " exceeds max dimension " + std::to_string(max_dim));
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// m-fold tensor power; tensor_power(a, 0) is the 1x1 identity.
inline ComplexMatrix tensor_power(const ComplexMatrix& a, int m,
                                  std::size_t max_dim = Tolerances{}.max_dim) {
  detail::require(m >= 0, ErrorCode::level_out_of_range, "negative tensor power");
  ComplexMatrix out = identity(1);
  for (int i = 0; i < m; ++i) out = tensor_product(out, a, max_dim);
  return out;
}

enum class Factor { A, B };

// Traces out one factor of a (dimA*dimB)-square matrix.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, Eigen::Index dim_a, Eigen::Index dim_b,
                                   Factor which) {
  detail::require(dim_a > 0 && dim_b > 0 && m.rows() == dim_a * dim_b && m.cols() == dim_a * dim_b,
                  ErrorCode::dimension_mismatch, "partial_trace: matrix is not (dimA*dimB)-square");
  if (which == Factor::B) {
    ComplexMatrix out = ComplexMatrix::Zero(dim_a, dim_a);
    for (Eigen::Index i = 0; i < dim_a; ++i)
      for (Eigen::Index j = 0; j < dim_a; ++j)
        out(i, j) = m.block(i * dim_b, j * dim_b, dim_b, dim_b).trace();
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(dim_b, dim_b);
  for (Eigen::Index i = 0; i < dim_a; ++i) out += m.block(i * dim_b, i * dim_b, dim_b, dim_b);
  return out;
}

// ---------------------------------------------------------------------------
// Hermitian functional calculus

struct HermitianEigen {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns
};

inline HermitianEigen hermitian_eigen(const ComplexMatrix& h) {
  detail::require_square(h, "hermitian_eigen input");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h));
  detail::require(es.info() == Eigen::Success, ErrorCode::singular, "eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

// Q^z for positive definite Hermitian Q and any complex exponent z.
inline ComplexMatrix matrix_power_analytic(const ComplexMatrix& q, cplx z,
                                           double rank_tol = Tolerances{}.rank) {
  detail::require_square(q, "matrix_power_analytic input");
  detail::require(is_hermitian(q, 1e-10), ErrorCode::not_hermitian,
                  "matrix functions are only defined for Hermitian input");
  const auto eig = hermitian_eigen(q);
  const double top = eig.values.cwiseAbs().maxCoeff();
  detail::require(eig.values.minCoeff() > rank_tol * std::max(top, 1e-300), ErrorCode::singular,
                  "matrix is not positive definite (min eigenvalue " +
                      std::to_string(eig.values.minCoeff()) + ")");
  ComplexVector f(eig.values.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = std::exp(z * std::log(eig.values(i)));
  return eig.vectors * f.asDiagonal() * eig.vectors.adjoint();
}

// Moore-Penrose inverse of a Hermitian matrix, discarding eigenvalues below
// rank_tol relative to the largest.
inline ComplexMatrix hermitian_pinv(const ComplexMatrix& h, double rank_tol = Tolerances{}.rank) {
  const auto eig = hermitian_eigen(h);
  const double top = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  ComplexMatrix out = ComplexMatrix::Zero(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (std::abs(eig.values(i)) > rank_tol * top) {
      const ComplexVector v = eig.vectors.col(i);
      out += (1.0 / eig.values(i)) * v * v.adjoint();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spans and completions

struct Projector {
  ComplexMatrix matrix;
  Eigen::Index rank = 0;
};

// Orthogonal projector onto the numerical column span of `vectors`
// (singular values above rank_tol * largest are kept).
inline Projector projector_onto_columns(const ComplexMatrix& vectors,
                                        double rank_tol = Tolerances{}.rank) {
  const Eigen::Index len = vectors.rows();
  if (vectors.cols() == 0 || len == 0) return {ComplexMatrix::Zero(len, len), 0};
  Eigen::JacobiSVD<ComplexMatrix> svd(vectors, Eigen::ComputeThinU);
  const RealVector& s = svd.singularValues();
  if (s(0) <= 0.0) return {ComplexMatrix::Zero(len, len), 0};
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > rank_tol * s(0)) ++r;
  const ComplexMatrix u = svd.matrixU().leftCols(r);
  return {u * u.adjoint(), r};
}

inline Projector projector_onto_span(const std::vector<ComplexVector>& vectors,
                                     double rank_tol = Tolerances{}.rank) {
  if (vectors.empty()) return {ComplexMatrix::Zero(0, 0), 0};
  const Eigen::Index len = vectors.front().size();
  ComplexMatrix cols(len, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    detail::require(vectors[i].size() == len, ErrorCode::dimension_mismatch,
                    "projector_onto_span: vectors of different length");
    cols.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return projector_onto_columns(cols, rank_tol);
}

// Spectral projector onto eigenvectors of a Hermitian matrix whose eigenvalue
// magnitude exceeds `threshold`.
inline Projector spectral_support(const ComplexMatrix& h, double threshold) {
  const auto eig = hermitian_eigen(h);
  ComplexMatrix p = ComplexMatrix::Zero(h.rows(), h.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (std::abs(eig.values(i)) > threshold) {
      const ComplexVector v = eig.vectors.col(i);
      p += v * v.adjoint();
      ++r;
    }
  }
  return {p, r};
}

// Unitary whose leading columns are the isometry V. For V of shape (dn)xd this
// is a unitary whose first block-column (bath-major) equals V.
inline ComplexMatrix orthonormal_completion(const ComplexMatrix& v, double tol = 1e-10) {
  detail::require(v.rows() >= v.cols(), ErrorCode::dimension_mismatch,
                  "orthonormal_completion: more columns than rows");
  detail::require(spectral_norm(v.adjoint() * v - identity(v.cols())) < tol,
                  ErrorCode::not_isometry, "orthonormal_completion: V*V != I");
  Eigen::HouseholderQR<ComplexMatrix> qr(v);
  const ComplexMatrix q = qr.householderQ() * identity(v.rows());
  ComplexMatrix w(v.rows(), v.rows());
  w.leftCols(v.cols()) = v;
  w.rightCols(v.rows() - v.cols()) = q.rightCols(v.rows() - v.cols());
  return w;
}

// Unit vector e_i in C^n.
inline ComplexVector basis_vector(Eigen::Index n, Eigen::Index i) {
  ComplexVector e = ComplexVector::Zero(n);
  e(i) = 1.0;
  return e;
}

// Block (j,k) of a bath-major operator with d x d blocks.
inline ComplexMatrix block(const ComplexMatrix& w, Eigen::Index j, Eigen::Index k, Eigen::Index d) {
  return w.block(j * d, k * d, d, d);
}

// Matrix of a bath operator F acting on C^n (x) H_0 in bath-major layout.
inline ComplexMatrix bath_operator(const ComplexMatrix& f, Eigen::Index d) {
  return tensor_product(f, identity(d), std::numeric_limits<std::size_t>::max());
}

// Matrix of a system operator A (x) 1 in bath-major layout.
inline ComplexMatrix system_operator(const ComplexMatrix& a, Eigen::Index n) {
  return tensor_product(identity(n), a, std::numeric_limits<std::size_t>::max());
}

// W^c: blockwise adjoint, block positions kept.
inline ComplexMatrix block_conjugate(const ComplexMatrix& w, Eigen::Index d) {
  detail::require(d > 0 && w.rows() == w.cols() && w.rows() % d == 0, ErrorCode::dimension_mismatch,
                  "block_conjugate: matrix is not a square array of d x d blocks");
  const Eigen::Index n = w.rows() / d;
  ComplexMatrix out(w.rows(), w.cols());
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) out.block(j * d, k * d, d, d) = block(w, j, k, d).adjoint();
  return out;
}

// Entry-wise complex conjugate of a scalar matrix (F^c for F in M_n).
inline ComplexMatrix entrywise_conjugate(const ComplexMatrix& f) { return f.conjugate(); }

}  // namespace qdb
