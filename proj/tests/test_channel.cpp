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

#include "qdb/channel.hpp"
#include "qdb/factories.hpp"
#include "support/oracles.hpp"

using namespace qdb;

namespace {

ComplexMatrix pauli(char which) {
  ComplexMatrix m(2, 2);
  switch (which) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

ComplexMatrix swap4() {
  ComplexMatrix s = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) s(a * 2 + b, b * 2 + a) = 1.0;
  return s;
}

double commutator_max(const KrausSet& k) {
  double worst = 0.0;
  for (const auto& a : k.ops())
    for (const auto& b : k.ops()) worst = std::max(worst, (a * b - b * a).norm());
  return worst;
}

}  // namespace

TEST_CASE("KrausSet intake", "[channel]") {
  CHECK_THROWS_AS(KrausSet(std::vector<ComplexMatrix>{}), Error);
  CHECK_THROWS_AS(KrausSet({identity(2), identity(3)}), Error);
  CHECK_THROWS_AS(KrausSet({identity(2), ComplexMatrix::Zero(2, 2)}), Error);
  const KrausSet k({identity(2)});
  CHECK(k.n() == 1);
  CHECK(k.unital_residual() == 0.0);
  CHECK(classify(k) == Classification::bistochastic);
  CHECK(classify(gad_channel(0.75, 0.5).kraus) == Classification::channel);
  CHECK(classify(KrausSet({0.5 * identity(2)})) == Classification::operation);
  CHECK(classify(KrausSet({2.0 * identity(2)})) == Classification::completely_positive);
}

TEST_CASE("apply", "[channel]") {
  oracle::Rng rng(21);
  const auto x = oracle::gaussian(2, 2, rng);
  SECTION("identity channel") { CHECK(apply(KrausSet({identity(2)}), x, Picture::heisenberg) == x); }
  SECTION("unitary conjugation") {
    const auto u = oracle::random_unitary(2, rng);
    CHECK(oracle::max_abs(apply(KrausSet({u}), x, Picture::heisenberg) - u.adjoint() * x * u) < 1e-14);
  }
  SECTION("GAD fixed point against direct 2x2 evaluation") {
    const auto ex = gad_channel(0.75, 0.5);
    ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
    rho(0, 0) = 0.75;
    rho(1, 1) = 0.25;
    const ComplexMatrix direct = oracle::schrodinger(ex.kraus.ops(), rho);
    CHECK(oracle::max_abs(direct - rho) < 1e-15);
    CHECK(oracle::max_abs(apply(ex.kraus, rho, Picture::schrodinger) - rho) < 1e-15);
  }
  SECTION("channels preserve Hermiticity and positivity") {
    for (int trial = 0; trial < 20; ++trial) {
      const KrausSet k(oracle::random_channel_ops(3, 2, rng));
      const auto h = oracle::random_hermitian(3, rng);
      CHECK(hermiticity_residual(apply(k, h, Picture::heisenberg)) < 1e-12);
      const auto psd = oracle::random_density(3, rng);
      CHECK(hermitian_eigen(apply(k, psd, Picture::heisenberg)).values.minCoeff() > -1e-10);
      CHECK(std::abs(apply(k, psd, Picture::schrodinger).trace() - 1.0) < 1e-12);
      CHECK(oracle::max_abs(apply(k, identity(3), Picture::heisenberg) - identity(3)) < 1e-12);
    }
  }
  SECTION("dimension mismatch") { CHECK_THROWS_AS(apply(KrausSet({identity(2)}), identity(3), Picture::heisenberg), Error); }
}

TEST_CASE("kraus_from_dilation", "[channel]") {
  SECTION("decoupled dilation has vanishing blocks") {
    oracle::Rng rng(22);
    const auto u = oracle::random_unitary(2, rng);
    try {
      kraus_from_dilation(tensor_product(identity(2), u), 2, 2);
      FAIL("expected invalid_kraus");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_kraus);
    }
  }
  SECTION("SWAP against explicit block extraction") {
    const ComplexMatrix s = swap4();
    const KrausSet k = kraus_from_dilation(s, 2, 2);
    for (int kk = 0; kk < 2; ++kk) {
      ComplexMatrix expected(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) expected(a, b) = s(kk * 2 + a, b);
      CHECK(k[static_cast<std::size_t>(kk)] == expected);
      ComplexMatrix pattern = ComplexMatrix::Zero(2, 2);
      pattern(0, kk) = 1.0;
      CHECK(k[static_cast<std::size_t>(kk)] == pattern);
    }
    CHECK(k.unital_residual() < 1e-15);
  }
  SECTION("measurement dilation gives commuting operators") {
    ComplexMatrix b(2, 2);
    b << 0.3, 0.7, 0.7, -0.2;
    const KrausSet k = measurement_channel(pauli('z'), b);
    CHECK(commutator_max(k) < 1e-10);
    CHECK(k.unital_residual() < 1e-12);
  }
  SECTION("general bath state reproduces the partial trace") {
    oracle::Rng rng(23);
    const auto w = oracle::random_unitary(6, rng);
    RealVector sigma(3);
    sigma << 0.5, 0.3, 0.2;
    const KrausSet k = kraus_from_dilation(w, 2, 3, DilationMode::general_state(sigma));
    CHECK(k.n() == 9);
    CHECK(k.unital_residual() < 1e-12);
    const auto rho = oracle::random_density(2, rng);
    ComplexMatrix sig = ComplexMatrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) sig(i, i) = sigma(i);
    // bath-major: the bath is the first tensor factor
    const ComplexMatrix joint = w * oracle::kron(sig, rho) * w.adjoint();
    ComplexMatrix reduced = ComplexMatrix::Zero(2, 2);
    for (int j = 0; j < 3; ++j) reduced += joint.block(j * 2, j * 2, 2, 2);
    CHECK(oracle::max_abs(apply(k, rho, Picture::schrodinger) - reduced) < 1e-12);
  }
  SECTION("input validation") {
    CHECK_THROWS_AS(kraus_from_dilation(2.0 * identity(4), 2, 2), Error);
    RealVector bad(2);
    bad << 0.7, 0.7;
    CHECK_THROWS_AS(kraus_from_dilation(swap4(), 2, 2, DilationMode::general_state(bad)), Error);
  }
}

TEST_CASE("dilation_from_kraus", "[channel]") {
  oracle::Rng rng(24);
  SECTION("identity channel") {
    const Dilation dil = dilation_from_kraus(KrausSet({identity(2)}));
    CHECK(dil.V == identity(2));
    CHECK(unitarity_residual(dil.W) < 1e-15);
  }
  SECTION("diagonal pair reconstructs the channel") {
    const KrausSet k = commuting_db_channel(M_PI / 6).kraus;
    const Dilation dil = dilation_from_kraus(k);
    CHECK(spectral_norm(dil.V.adjoint() * dil.V - identity(2)) < 1e-12);
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = oracle::gaussian(2, 2, rng);
      const ComplexMatrix recon = dil.V.adjoint() * oracle::kron(oracle::eye(2), a) * dil.V;
      CHECK(oracle::max_abs(recon - oracle::heisenberg(k.ops(), a)) < 1e-10);
    }
    CHECK(dil.commuting_normal);
    CHECK(unitarity_residual(block_conjugate(dil.W, 2)) < 1e-10);
  }
  SECTION("round trip through the unitary completion") {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index d = rng.integer(1, 4), n = rng.integer(1, 4);
      const KrausSet k(oracle::random_channel_ops(d, n, rng));
      const Dilation dil = dilation_from_kraus(k);
      CHECK(unitarity_residual(dil.W) < 1e-10);
      const KrausSet back = kraus_from_dilation(dil.W, d, n);
      CHECK(oracle::choi_distance(back.ops(), k.ops()) < 1e-9);
      CHECK(channel_distance(back, k) < 1e-9);
    }
  }
  SECTION("non-unital input is rejected") { CHECK_THROWS_AS(dilation_from_kraus(KrausSet({0.5 * identity(2)})), Error); }
}

TEST_CASE("minimal_kraus", "[channel]") {
  oracle::Rng rng(25);
  SECTION("duplicates collapse") {
    const KrausSet k({identity(2) / std::sqrt(2.0), identity(2) / std::sqrt(2.0)});
    const KrausSet m = minimal_kraus(k);
    CHECK(m.n() == 1);
    CHECK(channel_distance(m, KrausSet({identity(2)})) < 1e-12);
  }
  SECTION("independent sets keep their size and channel") {
    const KrausSet k(oracle::random_channel_ops(3, 3, rng));
    const KrausSet m = minimal_kraus(k);
    CHECK(m.n() == 3);
    CHECK(channel_distance(m, k) < 1e-12);
  }
  SECTION("Gram rank of {K, 2K, L}") {
    const auto kop = oracle::gaussian(3, 3, rng), lop = oracle::gaussian(3, 3, rng);
    const KrausSet k({kop, 2.0 * kop, lop});
    Eigen::MatrixXcd g(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) g(a, b) = oracle::trace(oracle::matmul(oracle::dagger(k[a]), k[b]));
    const Eigen::Index gram_rank = Eigen::FullPivLU<Eigen::MatrixXcd>(g).setThreshold(1e-9).rank();
    CHECK(gram_rank == 2);
    const KrausSet m = minimal_kraus(k);
    CHECK(m.n() == gram_rank);
    CHECK(oracle::choi_distance(m.ops(), k.ops()) < 1e-10);
  }
}

TEST_CASE("channel_choi and channel_distance", "[channel]") {
  oracle::Rng rng(26);
  SECTION("identity channel is twice the Bell projector") {
    const ComplexMatrix c = channel_choi(KrausSet({identity(2)}));
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = v(3) = 1.0;
    CHECK(oracle::max_abs(c - v * v.adjoint()) < 1e-15);
    CHECK(hermitian_eigen(c).values.maxCoeff() == Catch::Approx(2.0));
  }
  SECTION("completely depolarizing channel against the direct sum") {
    const KrausSet k({identity(2) / 2.0, pauli('x') / 2.0, pauli('y') / 2.0, pauli('z') / 2.0});
    const ComplexMatrix c = channel_choi(k);
    CHECK(oracle::max_abs(c - oracle::choi(k.ops())) < 1e-15);
    CHECK(oracle::max_abs(c - identity(4) / 2.0) < 1e-15);
  }
  SECTION("random channels match the index-loop Choi and are PSD") {
    for (int trial = 0; trial < 10; ++trial) {
      const KrausSet k(oracle::random_channel_ops(3, 2, rng));
      CHECK(oracle::max_abs(channel_choi(k) - oracle::choi(k.ops())) < 1e-13);
      CHECK(hermitian_eigen(channel_choi(k)).values.minCoeff() > -1e-12);
    }
  }
  SECTION("remixing invariance") {
    for (int trial = 0; trial < 10; ++trial) {
      const KrausSet k(oracle::random_channel_ops(2, 3, rng));
      const KrausSet r = remix(k, oracle::random_unitary(3, rng));
      CHECK(channel_distance(k, r) < 1e-12);
      CHECK(channel_distance(k, k) == 0.0);
    }
  }
  SECTION("identity against bit flip") {
    const double dist = channel_distance(KrausSet({identity(2)}), KrausSet({pauli('x')}));
    CHECK(std::abs(dist - oracle::choi_distance({oracle::eye(2)}, {pauli('x')})) < 1e-15);
    CHECK(dist == Catch::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  }
  SECTION("dimension mismatch") { CHECK_THROWS_AS(channel_distance(KrausSet({identity(2)}), KrausSet({identity(3)})), Error); }
}

TEST_CASE("power_kraus", "[channel]") {
  oracle::Rng rng(27);
  const KrausSet k = commuting_db_channel(M_PI / 6).kraus;
  SECTION("level zero and one") {
    const auto p0 = power_kraus(k, 0);
    REQUIRE(p0.ops.size() == 1);
    CHECK(p0.words.front().empty());
    CHECK(p0.ops.front() == identity(2));
    const auto p1 = power_kraus(k, 1);
    CHECK(p1.ops[0] == k[0]);
    CHECK(p1.ops[1] == k[1]);
  }
  SECTION("commuting letters give equal products") {
    const auto p2 = power_kraus(k, 2);
    REQUIRE(p2.words.size() == 4);
    CHECK(p2.words[1] == Word{0, 1});
    CHECK(p2.words[2] == Word{1, 0});
    CHECK(oracle::max_abs(p2.ops[1] - oracle::matmul(k[0], k[1])) < 1e-15);
    CHECK(oracle::max_abs(p2.ops[1] - p2.ops[2]) < 1e-15);
  }
  SECTION("composition law") {
    for (int trial = 0; trial < 5; ++trial) {
      const KrausSet r(oracle::random_channel_ops(3, 2, rng));
      const auto a = oracle::random_hermitian(3, rng);
      for (int m = 0; m <= 3; ++m) {
        const auto pm = power_kraus(r, m);
        CHECK(oracle::max_abs(oracle::heisenberg(pm.ops, a) - apply_power(r, a, m, Picture::heisenberg)) < 1e-9);
      }
      const auto p1 = oracle::words(r.ops(), 1), p2 = oracle::words(r.ops(), 2), p3 = power_kraus(r, 3).ops;
      CHECK(oracle::max_abs(oracle::heisenberg(p3, a) - oracle::heisenberg(p1, oracle::heisenberg(p2, a))) < 1e-9);
    }
  }
  SECTION("budget") { CHECK_THROWS_AS(power_kraus(KrausSet(oracle::random_channel_ops(2, 4, rng)), 7), Error); }
}
