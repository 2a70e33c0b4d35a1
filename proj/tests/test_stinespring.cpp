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

#include <catch_amalgamated.hpp>

#include "qdb/factories.hpp"
#include "qdb/stinespring.hpp"
#include "support/oracles.hpp"

using namespace qdb;

namespace {

// cos/sin of three distinct angles: commuting, normal, products independent.
KrausSet commuting_three_level() {
  ComplexMatrix k1 = ComplexMatrix::Zero(3, 3), k2 = ComplexMatrix::Zero(3, 3);
  const double angles[3] = {0.3, 0.9, 1.3};
  for (int i = 0; i < 3; ++i) {
    k1(i, i) = std::cos(angles[i]);
    k2(i, i) = std::sin(angles[i]);
  }
  return KrausSet({k1, k2});
}

// Permutation of the legs of (C^n)^{(x)3}: new leg i carries old leg perm[i].
oracle::Mat leg_permutation(int n, const int perm[3]) {
  const int dim = n * n * n;
  oracle::Mat p = oracle::Mat::Zero(dim, dim);
  for (int idx = 0; idx < dim; ++idx) {
    const int legs[3] = {idx / (n * n), (idx / n) % n, idx % n};
    const int out = legs[perm[0]] * n * n + legs[perm[1]] * n + legs[perm[2]];
    p(out, idx) = 1.0;
  }
  return p;
}

// Rank of the stacked vec(K_w^*) matrix by full-pivot LU.
Eigen::Index kernel_complement_rank(const std::vector<oracle::Mat>& words) {
  const Eigen::Index len = words.front().size();
  oracle::Mat t(len, static_cast<Eigen::Index>(words.size()));
  for (std::size_t w = 0; w < words.size(); ++w) {
    const oracle::Mat a = oracle::dagger(words[w]);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) t(i * a.cols() + j, static_cast<Eigen::Index>(w)) = a(i, j);
  }
  return Eigen::FullPivLU<oracle::Mat>(t).setThreshold(1e-10).rank();
}

}  // namespace

TEST_CASE("build_subproduct", "[stinespring]") {
  oracle::Rng rng(31);
  SECTION("identity channel") {
    const auto s = build_subproduct(KrausSet({identity(2)}), 4);
    for (int m = 0; m <= 4; ++m) {
      CHECK(s.rank(m) == 1);
      CHECK(std::abs(s.p(m)(0, 0) - 1.0) < 1e-14);
    }
  }
  SECTION("commuting pair spans the symmetric subspace") {
    const auto s = build_subproduct(commuting_three_level(), 3);
    CHECK(s.rank(1) == 2);
    CHECK(s.rank(2) == 3);
    CHECK(s.rank(3) == 3);  // diagonal 3x3 matrices bound the span
    oracle::Mat sw = oracle::Mat::Zero(4, 4);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) sw(b * 2 + a, a * 2 + b) = 1.0;
    const oracle::Mat sym = 0.5 * (oracle::eye(4) + sw);
    CHECK(oracle::max_abs(s.p(2) - sym) < 1e-10);
  }
  SECTION("two-dimensional diagonal pair saturates at rank two") {
    const auto s0 = build_subproduct(commuting_db_channel(M_PI / 6).kraus, 3);
    CHECK(s0.rank(2) == 2);
    CHECK(s0.rank(3) == 2);
    ComplexMatrix z = identity(2);
    z(1, 1) = -1.0;
    const auto s = build_subproduct(KrausSet({identity(2) / std::sqrt(2.0), z / std::sqrt(2.0)}), 2);
    CHECK(s.rank(2) == 2);
    ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
    expected(0, 0) = expected(0, 3) = expected(3, 0) = expected(3, 3) = 0.5;
    expected(1, 1) = expected(1, 2) = expected(2, 1) = expected(2, 2) = 0.5;
    CHECK(oracle::max_abs(s.p(2) - expected) < 1e-10);
  }
  SECTION("generic channels have no relations at level two") {
    for (int trial = 0; trial < 5; ++trial) {
      const KrausSet k(oracle::random_channel_ops(4, 2, rng));
      const auto s = build_subproduct(k, 2);
      CHECK(s.rank(2) == kernel_complement_rank(oracle::words(k.ops(), 2)));
      CHECK(s.rank(2) == 4);
    }
  }
  SECTION("projectors are Hermitian idempotents with the right ranks") {
    const KrausSet k(oracle::random_channel_ops(2, 3, rng));
    const auto s = build_subproduct(k, 3);
    for (int m = 1; m <= 3; ++m) {
      const auto& p = s.p(m);
      CHECK((p * p - p).norm() + (p - p.adjoint()).norm() < 1e-10);
      CHECK(s.rank(m) == kernel_complement_rank(oracle::words(k.ops(), m)));
    }
    CHECK(s.rank(2) == 4);
  }
  SECTION("dependent Kraus sets and budgets are rejected") {
    CHECK_THROWS_AS(build_subproduct(KrausSet({identity(2) / std::sqrt(2.0), identity(2) / std::sqrt(2.0)}), 2), Error);
    CHECK_THROWS_AS(build_subproduct(KrausSet(oracle::random_channel_ops(2, 4, rng)), 7), Error);
    const auto s = build_subproduct(KrausSet({identity(2)}), 2);
    CHECK_THROWS_AS(s.p(3), Error);
  }
}

TEST_CASE("check_subproduct_inclusion", "[stinespring]") {
  oracle::Rng rng(32);
  SECTION("identity channel") { CHECK(check_subproduct_inclusion(build_subproduct(KrausSet({identity(2)}), 2), 1, 1) < 1e-14); }
  SECTION("symmetric subspace inside the full square") {
    const auto s = build_subproduct(commuting_three_level(), 2);
    const oracle::Mat lhs = oracle::matmul(oracle::kron(s.p(1), s.p(1)), s.p(2));
    CHECK(oracle::max_abs(lhs - s.p(2)) < 1e-10);
    CHECK(check_subproduct_inclusion(s, 1, 1) < 1e-10);
  }
  SECTION("random channels at all levels up to three") {
    for (int trial = 0; trial < 10; ++trial) {
      const KrausSet k(oracle::random_channel_ops(rng.integer(2, 3), rng.integer(2, 3), rng));
      const auto s = build_subproduct(k, 3);
      for (int m = 0; m <= 3; ++m)
        for (int l = 0; m + l <= 3; ++l) CHECK(check_subproduct_inclusion(s, m, l) < 1e-9);
      for (int m = 1; m <= 2; ++m) CHECK(s.rank(m + 1) <= s.rank(m) * s.rank(1));
    }
  }
  SECTION("out of range") {
    const auto s = build_subproduct(KrausSet({identity(2)}), 2);
    CHECK_THROWS_AS(check_subproduct_inclusion(s, 2, 1), Error);
  }
}

TEST_CASE("verify_power_dilation", "[stinespring]") {
  oracle::Rng rng(33);
  SECTION("level one reduces to the Stinespring reconstruction") {
    const KrausSet k(oracle::random_channel_ops(3, 2, rng));
    const auto s = build_subproduct(k, 1);
    const auto r = verify_power_dilation(k, s, 1, oracle::random_hermitian(3, rng));
    CHECK(r.residual < 1e-12);
    CHECK(r.hypothesis_ok);
  }
  SECTION("commuting pair at level two") {
    const KrausSet k = commuting_three_level();
    const auto s = build_subproduct(k, 2);
    const auto a = oracle::gaussian(3, 3, rng);
    const auto r = verify_power_dilation(k, s, 2, a);
    CHECK(r.residual < 1e-9);
    CHECK(r.isometry_residual < 1e-9);
    CHECK(r.hypothesis_ok);
    CHECK(oracle::max_abs(apply_power(k, a, 2, Picture::heisenberg) -
                          oracle::heisenberg(k.ops(), oracle::heisenberg(k.ops(), a))) < 1e-12);
  }
  SECTION("unitary channel at every level") {
    const KrausSet k({oracle::random_unitary(3, rng)});
    const auto s = build_subproduct(k, 4);
    for (int m = 1; m <= 4; ++m) CHECK(verify_power_dilation(k, s, m, oracle::random_hermitian(3, rng)).residual < 1e-12);
  }
  SECTION("hypothesis failure is reported, not thrown") {
    // K_0 = |0><1| squares to zero, so e_0 (x) e_0 lies in the kernel.
    ComplexMatrix k0 = ComplexMatrix::Zero(2, 2), k1 = ComplexMatrix::Zero(2, 2);
    k0(0, 1) = 1.0;
    k1(1, 0) = 1.0;
    const KrausSet k({k0, k1});
    const auto s = build_subproduct(k, 2);
    const auto r = verify_power_dilation(k, s, 2, identity(2));
    CHECK_FALSE(r.hypothesis_ok);
    CHECK(r.residual < 1e-12);
  }
}

TEST_CASE("check_Q_compatibility", "[stinespring]") {
  oracle::Rng rng(34);
  SECTION("Q = 1") {
    const auto s = build_subproduct(KrausSet(oracle::random_channel_ops(2, 3, rng)), 2);
    CHECK(check_Q_compatibility(s, identity(3), 2) < 1e-12);
    const auto c = build_subproduct(commuting_db_channel(0.4).kraus, 2);
    CHECK(check_Q_compatibility(c, identity(2), 2) < 1e-12);
  }
  SECTION("random Q against a nontrivial p_2") {
    const auto s = build_subproduct(KrausSet(oracle::random_channel_ops(2, 3, rng)), 2);
    REQUIRE(s.rank(2) < 9);
    const auto g = oracle::gaussian(3, 3, rng);
    const ComplexMatrix q = g * g.adjoint() + identity(3);
    const oracle::Mat q2 = oracle::kron(q, q);
    const oracle::Mat comm = oracle::matmul(q2, s.p(2)) - oracle::matmul(s.p(2), q2);
    const double oracle_norm = Eigen::JacobiSVD<oracle::Mat>(comm).singularValues()(0);
    CHECK(oracle_norm > 1e-3);
    CHECK(std::abs(check_Q_compatibility(s, q, 2) - oracle_norm) < 1e-10 * oracle_norm);
  }
}

TEST_CASE("subproduct invariances", "[stinespring]") {
  oracle::Rng rng(35);
  SECTION("commuting sets: p_3 commutes with leg permutations") {
    const auto s = build_subproduct(commuting_three_level(), 3);
    const int perms[5][3] = {{1, 0, 2}, {0, 2, 1}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}};
    for (const auto& perm : perms) {
      const oracle::Mat p = leg_permutation(2, perm);
      CHECK(oracle::max_abs(oracle::matmul(p, s.p(3)) - oracle::matmul(s.p(3), p)) < 1e-10);
    }
  }
  SECTION("remixing conjugates the projectors") {
    const KrausSet k(oracle::random_channel_ops(2, 3, rng));
    const auto u = oracle::random_unitary(3, rng);
    const KrausSet r = remix(k, u);
    const auto s = build_subproduct(k, 2), sr = build_subproduct(r, 2);
    for (int m = 1; m <= 2; ++m) {
      CHECK(s.rank(m) == sr.rank(m));
      oracle::Mat um = oracle::eye(1);
      for (int i = 0; i < m; ++i) um = oracle::kron(um, u.transpose());
      CHECK(oracle::max_abs(oracle::matmul(oracle::matmul(um, s.p(m)), oracle::dagger(um)) - sr.p(m)) < 1e-10);
    }
  }
}
