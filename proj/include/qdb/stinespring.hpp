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

// The subproduct system generated by a Kraus set.
//
// Level m lives in (C^n)^{(x)m} with the basis e_w indexed by words. The
// linear map T_m : e_w -> K_w^* sends it onto the span GH_m of the adjoint
// products; p_m is the orthogonal projector onto (ker T_m)^perp, which T_m
// maps isometrically onto GH_m when the K_k^* are orthonormal at level one.

#include "qdb/channel.hpp"

#include <vector>

namespace qdb {

struct SubproductLevel {
  ComplexMatrix p;       // n^m x n^m projector
  Eigen::Index rank = 0; // n_m
};

struct SubproductSystem {
  Eigen::Index n = 0;
  int max_level = 0;
  std::vector<SubproductLevel> levels;  // index m = 0..max_level

  const SubproductLevel& level(int m) const {
    detail::require(m >= 0 && m <= max_level, ErrorCode::level_out_of_range,
                    "level " + std::to_string(m) + " not built (max " + std::to_string(max_level) + ")");
    return levels[static_cast<std::size_t>(m)];
  }
  const ComplexMatrix& p(int m) const { return level(m).p; }
  Eigen::Index rank(int m) const { return level(m).rank; }
};

// Projector onto the orthogonal complement of ker(e_w -> images[w]).
inline SubproductLevel subproduct_level_from_images(const std::vector<ComplexMatrix>& images,
                                                    double rank_tol = Tolerances{}.rank) {
  const Eigen::Index count = static_cast<Eigen::Index>(images.size());
  const Eigen::Index len = images.front().size();
  // Rows of T^*: the kernel complement is the column span of T^*.
  ComplexMatrix t(len, count);
  for (Eigen::Index w = 0; w < count; ++w)
    t.col(w) = Eigen::Map<const ComplexVector>(images[static_cast<std::size_t>(w)].data(), len);
  const Projector proj = projector_onto_columns(t.adjoint(), rank_tol);
  return {proj.matrix, proj.rank};
}

// Levels 0..max_level for an arbitrary operator family, mapping e_w to the
// word product of `ops` (or its adjoint when `adjoint` is set).
inline SubproductSystem subproduct_from_family(const std::vector<ComplexMatrix>& ops, Eigen::Index d,
                                               int max_level, bool adjoint, const Tolerances& tol = {}) {
  detail::require(max_level >= 0, ErrorCode::level_out_of_range, "negative max level");
  SubproductSystem s;
  s.n = static_cast<Eigen::Index>(ops.size());
  s.max_level = max_level;
  word_count(s.n, max_level, tol.max_dim);
  s.levels.push_back({identity(1), 1});
  std::vector<ComplexMatrix> level{identity(d)};
  for (int m = 1; m <= max_level; ++m) {
    std::vector<ComplexMatrix> next;
    next.reserve(level.size() * ops.size());
    for (const auto& prefix : level)
      for (const auto& op : ops) next.push_back(prefix * op);
    level = std::move(next);
    if (adjoint) {
      std::vector<ComplexMatrix> adj;
      adj.reserve(level.size());
      for (const auto& x : level) adj.push_back(x.adjoint());
      s.levels.push_back(subproduct_level_from_images(adj, tol.rank));
    } else {
      s.levels.push_back(subproduct_level_from_images(level, tol.rank));
    }
  }
  return s;
}

// Requires linearly independent Kraus operators; pass the set through
// minimal_kraus first if in doubt.
inline SubproductSystem build_subproduct(const KrausSet& k, int max_level, const Tolerances& tol = {}) {
  SubproductSystem s = subproduct_from_family(k.ops(), k.d(), max_level, true, tol);
  if (max_level >= 1)
    detail::require(s.rank(1) == k.n(), ErrorCode::invalid_kraus,
                    "Kraus operators are linearly dependent (rank " + std::to_string(s.rank(1)) + " of " +
                        std::to_string(k.n()) + "); reduce with minimal_kraus");
  return s;
}

// || (p_m (x) p_l) p_{m+l} - p_{m+l} ||
inline double check_subproduct_inclusion(const SubproductSystem& s, int m, int l) {
  detail::require(m >= 0 && l >= 0 && m + l <= s.max_level, ErrorCode::level_out_of_range,
                  "inclusion check needs m + l <= max level");
  const ComplexMatrix& pml = s.p(m + l);
  const ComplexMatrix pp = tensor_product(s.p(m), s.p(l), std::numeric_limits<std::size_t>::max());
  return spectral_norm(pp * pml - pml);
}

// Whether the m-th tensor power of e_0 lies in GH_m.
inline double first_word_defect(const SubproductSystem& s, int m) {
  const ComplexMatrix& p = s.p(m);
  const ComplexVector e = basis_vector(p.rows(), 0);
  return (p * e - e).norm();
}

struct PowerDilationCheck {
  double residual = 0.0;            // || V_m^*(A (x) 1)V_m - Phi^m(A) ||
  double isometry_residual = 0.0;   // || V_m^* V_m - I ||
  double first_word_defect = 0.0;   // || p_m e_0^{(x)m} - e_0^{(x)m} ||
  bool hypothesis_ok = false;
};

// Level-m dilation V_m xi = sum_w K_w xi (x) p_m e_w. Because K_w equals
// sum_r (p_m)_{wr} K_r, V_m is already an isometry and no renormalization by
// a Gram inverse is needed; its defect is reported for completeness.
inline PowerDilationCheck verify_power_dilation(const KrausSet& k, const SubproductSystem& s, int m,
                                                const ComplexMatrix& a, const Tolerances& tol = {}) {
  detail::require(a.rows() == k.d() && a.cols() == k.d(), ErrorCode::dimension_mismatch,
                  "verify_power_dilation: A is not d x d");
  const ComplexMatrix& p = s.p(m);
  const auto products = all_word_products(k.ops(), k.d(), m, tol.max_dim);
  const Eigen::Index count = static_cast<Eigen::Index>(products.size());
  const Eigen::Index d = k.d();
  ComplexMatrix lhs = ComplexMatrix::Zero(d, d);
  ComplexMatrix gram = ComplexMatrix::Zero(d, d);
  for (Eigen::Index r = 0; r < count; ++r) {
    ComplexMatrix b = ComplexMatrix::Zero(d, d);
    for (Eigen::Index w = 0; w < count; ++w)
      if (p(r, w) != cplx(0.0)) b += p(r, w) * products[static_cast<std::size_t>(w)];
    lhs += b.adjoint() * a * b;
    gram += b.adjoint() * b;
  }
  PowerDilationCheck out;
  out.residual = spectral_norm(lhs - apply_power(k, a, m, Picture::heisenberg));
  out.isometry_residual = spectral_norm(gram - identity(d));
  out.first_word_defect = first_word_defect(s, m);
  out.hypothesis_ok = out.first_word_defect < tol.residual;
  return out;
}

// || [Q^{(x)m}, p_m] ||
inline double check_Q_compatibility(const SubproductSystem& s, const ComplexMatrix& q, int m) {
  detail::require(q.rows() == s.n && q.cols() == s.n, ErrorCode::dimension_mismatch,
                  "Q has the wrong dimension for this subproduct system");
  const ComplexMatrix& p = s.p(m);
  const ComplexMatrix qm = tensor_power(q, m, std::numeric_limits<std::size_t>::max());
  return spectral_norm(qm * p - p * qm);
}

}  // namespace qdb
