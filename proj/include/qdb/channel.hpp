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

// Kraus sets, channel application, dilations and channel fingerprints.
//
// A Kraus set {K_k} defines the Heisenberg map A -> sum_k K_k^* A K_k and its
// Schrodinger dual rho -> sum_k K_k rho K_k^*. Letters of a word are 0-based;
// words are enumerated lexicographically with the leftmost letter most
// significant, and K_w = K_{w_1} ... K_{w_m}.

#include "qdb/matcore.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace qdb {

using Word = std::vector<int>;

class KrausSet {
 public:
  KrausSet() = default;

  explicit KrausSet(std::vector<ComplexMatrix> ops) : ops_(std::move(ops)) {
    detail::require(!ops_.empty(), ErrorCode::invalid_kraus, "a Kraus set needs at least one operator");
    d_ = ops_.front().rows();
    detail::require(d_ > 0, ErrorCode::invalid_kraus, "empty Kraus operator");
    ComplexMatrix kk = ComplexMatrix::Zero(d_, d_);
    ComplexMatrix kks = ComplexMatrix::Zero(d_, d_);
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      const auto& op = ops_[k];
      detail::require(op.rows() == d_ && op.cols() == d_, ErrorCode::dimension_mismatch,
                      "Kraus operator " + std::to_string(k) + " is not " + std::to_string(d_) + "x" +
                          std::to_string(d_));
      require_finite(op, "Kraus operator");
      detail::require(op.norm() > 1e-14, ErrorCode::invalid_kraus,
                      "Kraus operator " + std::to_string(k) + " is zero");
      kk += op.adjoint() * op;
      kks += op * op.adjoint();
    }
    unital_residual_ = spectral_norm(kk - identity(d_));
    cotrace_residual_ = spectral_norm(kks - identity(d_));
  }

  Eigen::Index d() const { return d_; }
  Eigen::Index n() const { return static_cast<Eigen::Index>(ops_.size()); }
  const std::vector<ComplexMatrix>& ops() const { return ops_; }
  const ComplexMatrix& operator[](std::size_t k) const { return ops_[k]; }
  // || sum K^*K - I || and || sum KK^* - I ||.
  double unital_residual() const { return unital_residual_; }
  double cotrace_residual() const { return cotrace_residual_; }

 private:
  std::vector<ComplexMatrix> ops_;
  Eigen::Index d_ = 0;
  double unital_residual_ = 0.0;
  double cotrace_residual_ = 0.0;
};

// `completely_positive` covers maps with Phi(1) not bounded by 1, which
// arise as formal reversals of channels that fail the sphere condition.
enum class Classification { completely_positive, operation, channel, bistochastic };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::completely_positive: return "completely_positive";
    case Classification::operation: return "operation";
    case Classification::channel: return "channel";
    case Classification::bistochastic: return "bistochastic";
  }
  return "unknown";
}

inline Classification classify(const KrausSet& k, double tol = Tolerances{}.residual) {
  if (k.unital_residual() < tol)
    return k.cotrace_residual() < tol ? Classification::bistochastic : Classification::channel;
  ComplexMatrix kk = ComplexMatrix::Zero(k.d(), k.d());
  for (const auto& op : k.ops()) kk += op.adjoint() * op;
  const double top = hermitian_eigen(kk).values.maxCoeff();
  return top <= 1.0 + tol ? Classification::operation : Classification::completely_positive;
}

inline bool is_channel(Classification c) {
  return c == Classification::channel || c == Classification::bistochastic;
}

enum class Picture { heisenberg, schrodinger };

inline ComplexMatrix apply(const KrausSet& k, const ComplexMatrix& x, Picture picture) {
  detail::require(x.rows() == k.d() && x.cols() == k.d(), ErrorCode::dimension_mismatch,
                  "apply: operand is not d x d");
  ComplexMatrix out = ComplexMatrix::Zero(k.d(), k.d());
  for (const auto& op : k.ops()) {
    if (picture == Picture::heisenberg)
      out += op.adjoint() * x * op;
    else
      out += op * x * op.adjoint();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Words

inline std::size_t word_count(Eigen::Index n, int m, std::size_t max_count = Tolerances{}.max_dim) {
  detail::require(m >= 0, ErrorCode::level_out_of_range, "negative word length");
  std::size_t count = 1;
  for (int i = 0; i < m; ++i) {
    count *= static_cast<std::size_t>(n);
    detail::require(count <= max_count, ErrorCode::budget_exceeded,
                    std::to_string(n) + "^" + std::to_string(m) + " words exceed the budget of " +
                        std::to_string(max_count));
  }
  return count;
}

inline Word word_at(std::size_t index, Eigen::Index n, int m) {
  Word w(static_cast<std::size_t>(m));
  for (int i = m - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::size_t>(n));
    index /= static_cast<std::size_t>(n);
  }
  return w;
}

inline std::size_t word_index(const Word& w, Eigen::Index n) {
  std::size_t idx = 0;
  for (int letter : w) {
    detail::require(letter >= 0 && letter < n, ErrorCode::dimension_mismatch, "letter out of range");
    idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(letter);
  }
  return idx;
}

inline Word reversed(Word w) {
  std::reverse(w.begin(), w.end());
  return w;
}

// Products of a word in an arbitrary operator family.
inline ComplexMatrix word_product(const std::vector<ComplexMatrix>& ops, const Word& w, Eigen::Index d) {
  ComplexMatrix out = identity(d);
  for (int letter : w) out = out * ops[static_cast<std::size_t>(letter)];
  return out;
}

// All n^m products of a family in lexicographic word order.
inline std::vector<ComplexMatrix> all_word_products(const std::vector<ComplexMatrix>& ops, Eigen::Index d,
                                                    int m, std::size_t max_count = Tolerances{}.max_dim) {
  const auto n = static_cast<Eigen::Index>(ops.size());
  word_count(n, m, max_count);
  std::vector<ComplexMatrix> level{identity(d)};
  for (int step = 0; step < m; ++step) {
    std::vector<ComplexMatrix> next;
    next.reserve(level.size() * ops.size());
    for (const auto& prefix : level)
      for (const auto& op : ops) next.push_back(prefix * op);
    level = std::move(next);
  }
  return level;
}

struct PowerKraus {
  std::vector<Word> words;
  std::vector<ComplexMatrix> ops;
};

inline PowerKraus power_kraus(const KrausSet& k, int m, std::size_t max_count = Tolerances{}.max_dim) {
  PowerKraus out;
  out.ops = all_word_products(k.ops(), k.d(), m, max_count);
  out.words.reserve(out.ops.size());
  for (std::size_t i = 0; i < out.ops.size(); ++i) out.words.push_back(word_at(i, k.n(), m));
  return out;
}

// Phi^m applied by repetition.
inline ComplexMatrix apply_power(const KrausSet& k, const ComplexMatrix& x, int m, Picture picture) {
  ComplexMatrix out = x;
  for (int i = 0; i < m; ++i) out = apply(k, out, picture);
  return out;
}

// ---------------------------------------------------------------------------
// Choi fingerprint

inline ComplexMatrix channel_choi(const KrausSet& k) {
  const Eigen::Index d = k.d();
  ComplexMatrix choi = ComplexMatrix::Zero(d * d, d * d);
  ComplexVector v(d * d);
  for (const auto& op : k.ops()) {
    for (Eigen::Index i = 0; i < d; ++i) v.segment(i * d, d) = op.col(i);
    choi += v * v.adjoint();
  }
  return choi;
}

inline double channel_distance(const KrausSet& a, const KrausSet& b) {
  detail::require(a.d() == b.d(), ErrorCode::dimension_mismatch, "channel_distance: system dimensions differ");
  return (channel_choi(a) - channel_choi(b)).norm();
}

// K'_j = sum_k mix(k, j) K_k. Operators that vanish numerically are dropped.
inline KrausSet remix(const KrausSet& k, const ComplexMatrix& mix, double drop_tol = 1e-13) {
  detail::require(mix.rows() == k.n(), ErrorCode::dimension_mismatch, "remix: mixing matrix has wrong row count");
  std::vector<ComplexMatrix> out;
  for (Eigen::Index j = 0; j < mix.cols(); ++j) {
    ComplexMatrix op = ComplexMatrix::Zero(k.d(), k.d());
    for (Eigen::Index r = 0; r < k.n(); ++r) op += mix(r, j) * k[static_cast<std::size_t>(r)];
    if (op.norm() > drop_tol) out.push_back(std::move(op));
  }
  return KrausSet(std::move(out));
}

// Linearly independent Kraus operators for the same channel: the remix along
// the eigenvectors of G_jk = Tr(K_j^* K_k), largest eigenvalue first. The
// remix is not unique; this one is orthogonal in the Hilbert-Schmidt sense.
inline KrausSet minimal_kraus(const KrausSet& k, double rank_tol = Tolerances{}.rank) {
  ComplexMatrix g(k.n(), k.n());
  for (Eigen::Index j = 0; j < k.n(); ++j)
    for (Eigen::Index l = 0; l < k.n(); ++l)
      g(j, l) = (k[static_cast<std::size_t>(j)].adjoint() * k[static_cast<std::size_t>(l)]).trace();
  const auto eig = hermitian_eigen(g);
  const double top = eig.values.maxCoeff();
  std::vector<ComplexMatrix> out;
  for (Eigen::Index a = eig.values.size() - 1; a >= 0; --a) {
    if (eig.values(a) <= rank_tol * top) continue;
    ComplexMatrix op = ComplexMatrix::Zero(k.d(), k.d());
    for (Eigen::Index r = 0; r < k.n(); ++r) op += eig.vectors(r, a) * k[static_cast<std::size_t>(r)];
    out.push_back(std::move(op));
  }
  return KrausSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Dilations

struct Dilation {
  ComplexMatrix V;  // (dn) x d isometry, block k equals K_k
  ComplexMatrix W;  // (dn) x (dn) unitary whose first block-column is V
  bool commuting_normal = false;
};

inline ComplexMatrix stacked_isometry(const KrausSet& k) {
  ComplexMatrix v(k.d() * k.n(), k.d());
  for (Eigen::Index j = 0; j < k.n(); ++j) v.block(j * k.d(), 0, k.d(), k.d()) = k[static_cast<std::size_t>(j)];
  return v;
}

inline double commutation_residual(const KrausSet& k) {
  double worst = 0.0;
  for (const auto& a : k.ops())
    for (const auto& b : k.ops()) {
      worst = std::max(worst, (a * b - b * a).norm());
      worst = std::max(worst, (a * b.adjoint() - b.adjoint() * a).norm());
    }
  return worst;
}

namespace detail {

// Joint eigenbasis of a commuting family of normal matrices, or an empty
// matrix when the candidate basis does not diagonalize every member.
inline ComplexMatrix joint_eigenbasis(const KrausSet& k, double tol) {
  const Eigen::Index d = k.d();
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  // Fixed irrational weights keep accidental degeneracies away.
  for (Eigen::Index j = 0; j < k.n(); ++j) {
    const double w1 = std::sqrt(2.0 + static_cast<double>(j)) - 0.37 * static_cast<double>(j);
    const double w2 = std::sqrt(3.0 + 1.7 * static_cast<double>(j));
    const auto& op = k[static_cast<std::size_t>(j)];
    h += w1 * (op + op.adjoint()) + cplx(0.0, w2) * (op - op.adjoint());
  }
  const ComplexMatrix u = hermitian_eigen(h).vectors;
  for (const auto& op : k.ops()) {
    ComplexMatrix t = u.adjoint() * op * u;
    t.diagonal().setZero();
    if (t.norm() > tol) return {};
  }
  return u;
}

}  // namespace detail

// V = stacked Kraus operators; W completes V to a unitary. For commuting
// normal Kraus sets the completion is done fibre by fibre in a joint
// eigenbasis, so every block of W is a function of the same normal operators.
inline Dilation dilation_from_kraus(const KrausSet& k, double tol = Tolerances{}.residual) {
  detail::require(k.unital_residual() < tol, ErrorCode::not_isometry,
                  "dilation_from_kraus needs a unital Kraus set, residual " + std::to_string(k.unital_residual()));
  Dilation out;
  out.V = stacked_isometry(k);
  const Eigen::Index d = k.d();
  const Eigen::Index n = k.n();
  if (n > 1 && commutation_residual(k) < tol) {
    const ComplexMatrix u = detail::joint_eigenbasis(k, 1e-9);
    if (u.size() != 0) {
      ComplexMatrix w = ComplexMatrix::Zero(d * n, d * n);
      for (Eigen::Index i = 0; i < d; ++i) {
        const ComplexVector phi = u.col(i);
        ComplexVector lam(n);
        for (Eigen::Index j = 0; j < n; ++j) lam(j) = phi.dot(k[static_cast<std::size_t>(j)] * phi);
        lam /= lam.norm();
        const ComplexMatrix fibre = orthonormal_completion(lam, 1e-8);
        w += tensor_product(fibre, phi * phi.adjoint(), std::numeric_limits<std::size_t>::max());
      }
      // The first block-column must reproduce V exactly, not just up to the
      // rounding of the joint basis.
      w.leftCols(d) = out.V;
      if (unitarity_residual(w) < 1e-9) {
        out.W = std::move(w);
        out.commuting_normal = true;
        return out;
      }
    }
  }
  out.W = orthonormal_completion(out.V, 1e-8);
  return out;
}

struct DilationMode {
  enum class Kind { first_column, general_state } kind = Kind::first_column;
  RealVector sigma;  // eigenvalues of the bath state, general_state only

  static DilationMode first_column() { return {}; }
  static DilationMode general_state(RealVector s) { return {Kind::general_state, std::move(s)}; }
};

// first_column: K_k = W_{k,0}. general_state: K_{j,k} = sqrt(sigma_k) W_{j,k},
// stored at position j*n+k with sigma_k = 0 (and vanishing blocks) skipped.
inline KrausSet kraus_from_dilation(const ComplexMatrix& w, Eigen::Index d, Eigen::Index n,
                                    const DilationMode& mode = DilationMode::first_column(),
                                    double tol = Tolerances{}.residual) {
  detail::require(d > 0 && n > 0 && w.rows() == d * n && w.cols() == d * n, ErrorCode::dimension_mismatch,
                  "kraus_from_dilation: W is not (dn) x (dn)");
  detail::require(unitarity_residual(w) < tol, ErrorCode::not_unitary, "kraus_from_dilation: W is not unitary");
  std::vector<ComplexMatrix> ops;
  if (mode.kind == DilationMode::Kind::first_column) {
    for (Eigen::Index k = 0; k < n; ++k) {
      ComplexMatrix b = block(w, k, 0, d);
      detail::require(b.norm() > 1e-12, ErrorCode::invalid_kraus,
                      "block (" + std::to_string(k) + ",0) of W is zero; the bath does not couple");
      ops.push_back(std::move(b));
    }
    return KrausSet(std::move(ops));
  }
  const RealVector& s = mode.sigma;
  detail::require(s.size() == n, ErrorCode::invalid_state, "bath state has wrong dimension");
  detail::require(s.minCoeff() >= -1e-12 && std::abs(s.sum() - 1.0) < 1e-10, ErrorCode::invalid_state,
                  "bath state eigenvalues must be nonnegative and sum to one");
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) {
      if (s(k) <= 1e-15) continue;
      ComplexMatrix b = std::sqrt(s(k)) * block(w, j, k, d);
      if (b.norm() > 1e-13) ops.push_back(std::move(b));
    }
  return KrausSet(std::move(ops));
}

}  // namespace qdb
