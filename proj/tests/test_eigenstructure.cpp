#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "autgrp/eigenstructure.hpp"

#include <algorithm>
#include <map>

using namespace autgrp::core_linalg;
using namespace autgrp::eigenstructure;

namespace {

// 4x4 example with cosquare Jordan form J_2^2 + J_2^{1/2}.
CMat example_j() {
  RMat J(4, 4);
  J << 5, 6, -9, -9, 1, 0, -1, 1, -3, -6, 7, 7, -6, 2, 2, 0;
  return J.cast<Cx>();
}

CMat random_cmat(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  return random_gaussian(n, m, rng, true);
}

// Upper Jordan block lam*I + N.
CMat jordan_block(Cx lam, int r) {
  CMat J = lam * CMat::Identity(r, r);
  for (int i = 0; i + 1 < r; ++i) J(i, i + 1) = 1.0;
  return J;
}

CMat span_of(const std::vector<CMat>& mats) {
  if (mats.empty()) return CMat(0, 0);
  const int nn = static_cast<int>(mats[0].size());
  CMat V(nn, static_cast<int>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i) V.col(i) = vec(mats[i]);
  return orth(V);
}

std::map<double, std::vector<int>> blocks_by_real(const JordanSpec& spec) {
  std::map<double, std::vector<int>> out;
  for (const auto& e : spec.eigenvalues)
    out[std::round(e.eigenvalue.real() * 1e6) / 1e6] = e.sizes;
  return out;
}

}  // namespace

TEST_CASE("cosquare: identity, symplectic 2x2, singular rejection") {
  CHECK((cosquare(CMat::Identity(3, 3), Involution::T) -
         CMat::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  CMat Omega(2, 2);
  Omega << 0, 1, -1, 0;
  CHECK((cosquare(Omega, Involution::T) + CMat::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  CMat S(2, 2);
  S << 1, 2, 2, 4;  // rank 1
  CHECK_THROWS_AS(cosquare(S, Involution::T), SingularInput);
}

TEST_CASE("cosquare of the 4x4 worked example") {
  RMat expect(4, 4);
  expect << 0, 2, 0, -3, -5, 8, -3, -6, -1, 2, 1, -3, -2, 0, 2, 1;
  expect *= 0.5;
  CMat C = cosquare(example_j(), Involution::T);
  CHECK((C - expect.cast<Cx>()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("jordan_structure: diagonalizable, defective, nilpotent") {
  JordanSpec id = jordan_structure(CMat::Identity(4, 4));
  REQUIRE(id.eigenvalues.size() == 1);
  CHECK(near_eig(id.eigenvalues[0].eigenvalue, 1.0));
  CHECK(id.eigenvalues[0].sizes == std::vector<int>{1, 1, 1, 1});

  JordanSpec ex = jordan_structure(cosquare(example_j(), Involution::T));
  auto blocks = blocks_by_real(ex);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0.5] == std::vector<int>{2});
  CHECK(blocks[2.0] == std::vector<int>{2});

  // Scrambled defective matrix with two eigenvalues, sizes [3,1] each.
  CMat D = CMat::Zero(8, 8);
  D.block(0, 0, 3, 3) = jordan_block(2.0, 3);
  D(3, 3) = 2.0;
  D.block(4, 4, 3, 3) = jordan_block(0.5, 3);
  D(7, 7) = 0.5;
  CMat S = CMat::Identity(8, 8) + 0.4 * random_cmat(8, 8, 3);
  CMat C = S * D * S.inverse();
  auto blk = blocks_by_real(jordan_structure(C));
  REQUIRE(blk.size() == 2);
  CHECK(blk[0.5] == std::vector<int>{3, 1});
  CHECK(blk[2.0] == std::vector<int>{3, 1});

  // Exact nilpotent J_2(0) + J_3(0): eigenvalues scatter ~eps^{1/5}
  // around zero, so the coarse clustering rung has to catch them.
  CMat N = CMat::Zero(5, 5);
  N(0, 1) = 1.0;
  N(2, 3) = 1.0;
  N(3, 4) = 1.0;
  JordanSpec nil = jordan_structure(N);
  REQUIRE(nil.eigenvalues.size() == 1);
  CHECK(std::abs(nil.eigenvalues[0].eigenvalue) < 1e-2);
  CHECK(nil.eigenvalues[0].sizes == std::vector<int>{3, 2});
}

TEST_CASE("pair_classes groups reciprocal partners and picks representatives") {
  JordanSpec ex = jordan_structure(cosquare(example_j(), Involution::T));
  auto cls = pair_classes(ex, Involution::T, Field::Complex);
  REQUIRE(cls.size() == 1);
  CHECK(cls[0].members.size() == 2);
  CHECK(near_eig(cls[0].rep, 2.0));
  CHECK_FALSE(cls[0].self_paired);

  // H pairing: lambda with 1/conj(lambda); unit eigenvalues self-pair.
  JordanSpec hs;
  hs.eigenvalues = {{Cx(2.0, 1.0), {1}},
                    {1.0 / std::conj(Cx(2.0, 1.0)), {1}},
                    {Cx(0.6, 0.8), {2}}};
  auto hcls = pair_classes(hs, Involution::H, Field::Complex);
  REQUIRE(hcls.size() == 2);
  int selfs = 0;
  for (const auto& c : hcls) {
    if (c.self_paired) {
      ++selfs;
      CHECK(near_eig(c.rep, Cx(0.6, 0.8)));
    } else {
      CHECK(near_eig(c.rep, Cx(2.0, 1.0)));
    }
  }
  CHECK(selfs == 1);

  // Real T: closure under conjugation gives the quadruple class.
  Cx z(1.5, 0.9);
  JordanSpec rs;
  rs.eigenvalues = {{z, {1}},
                    {std::conj(z), {1}},
                    {1.0 / z, {1}},
                    {1.0 / std::conj(z), {1}}};
  auto rcls = pair_classes(rs, Involution::T, Field::Real);
  REQUIRE(rcls.size() == 1);
  CHECK(rcls[0].members.size() == 4);
  CHECK(near_eig(rcls[0].rep, z));  // |z| > 1 and Im > 0

  // A missing partner must be loud.
  JordanSpec bad;
  bad.eigenvalues = {{Cx(2.0, 0.0), {1}}, {Cx(3.0, 0.0), {1}}};
  CHECK_THROWS_AS(pair_classes(bad, Involution::T, Field::Complex),
                  StructureError);
}

TEST_CASE("jordan_chains reproduces the worked example chain span") {
  CMat J = example_j();
  CMat C = cosquare(J, Involution::T);
  JordanSpec spec = jordan_structure(C);
  auto sets = jordan_chains(C, spec, Involution::T, Field::Complex);
  REQUIRE(sets.size() == 1);
  const auto& cs = sets[0];
  CHECK(near_eig(cs.rep, 2.0));
  REQUIRE(cs.W.size() == 1);
  REQUIRE(cs.W[0].cols() == 2);

  // Chain relations at the representative.
  CMat Jb = jordan_block(cs.rep, 2);
  CHECK((C * cs.W[0] - cs.W[0] * Jb).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((C.inverse() * cs.U[0] - cs.U[0] * Jb).cwiseAbs().maxCoeff() < 1e-8);

  // Published chain matrices span the same column spaces.
  RMat Wp(4, 2), Up(4, 2);
  Wp << 6, 1, 12, 8, 6, 1, 0, 0;
  Up << -4, 7, -8, 15, -4, 8, -4, 7;
  CHECK(min_subspace_cosine(orth(cs.W[0]), orth(Wp.cast<Cx>())) > 1 - 1e-8);
  CHECK(min_subspace_cosine(orth(cs.U[0]), orth(Up.cast<Cx>())) > 1 - 1e-8);
  // Eigenvector directions agree too (first columns).
  CHECK(min_subspace_cosine(orth(cs.W[0].col(0)), orth(CMat(Wp.cast<Cx>().col(0)))) >
        1 - 1e-8);
}

TEST_CASE("jordan_chains satisfies the block relations on random input") {
  for (std::uint64_t seed : {10, 11, 12}) {
    CMat J = random_cmat(5, 5, seed);
    for (Involution inv : {Involution::T, Involution::H}) {
      CMat C = cosquare(J, inv);
      JordanSpec spec = jordan_structure(C);
      CMat Ci = C.inverse();
      auto sets = jordan_chains(C, spec, inv, Field::Complex);
      for (const auto& cs : sets) {
        for (std::size_t b = 0; b < cs.W.size(); ++b) {
          const int r = cs.sizes[b];
          CMat Jb = jordan_block(cs.rep, r);
          CMat Jbu = jordan_block(
              inv == Involution::H ? std::conj(cs.rep) : cs.rep, r);
          CHECK((C * cs.W[b] - cs.W[b] * Jb).cwiseAbs().maxCoeff() < 1e-8);
          CHECK((Ci * cs.U[b] - cs.U[b] * Jbu).cwiseAbs().maxCoeff() < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("jordan_chains realifies nonreal classes of real problems") {
  RMat J(2, 2);
  J << 1, 1, -1, 1;  // cosquare has a unit nonreal pair
  CMat C = cosquare(J.cast<Cx>(), Involution::T);
  JordanSpec spec = jordan_structure(C);
  auto sets = jordan_chains(C, spec, Involution::T, Field::Real);
  REQUIRE(sets.size() == 1);
  const auto& cs = sets[0];
  CHECK(cs.realified);
  REQUIRE(cs.W.size() == 1);
  CHECK(cs.W[0].cols() == 2);  // [Re | Im] of a 1-chain
  CHECK(cs.W[0].imag().cwiseAbs().maxCoeff() == 0.0);

  CMat Jb = jordan_block(cs.rep, 1);
  CMat R = realify(Jb).cast<Cx>();
  CHECK((C * cs.W[0] - cs.W[0] * R).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((C.inverse() * cs.U[0] - cs.U[0] * R).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("chain spans are independent of the top mixing") {
  CMat D = CMat::Zero(8, 8);
  D.block(0, 0, 3, 3) = jordan_block(2.0, 3);
  D(3, 3) = 2.0;
  D.block(4, 4, 3, 3) = jordan_block(0.5, 3);
  D(7, 7) = 0.5;
  CMat S = CMat::Identity(8, 8) + 0.3 * random_cmat(8, 8, 23);
  CMat C = S * D * S.inverse();
  JordanSpec spec = jordan_structure(C);

  ChainOptions plain, mixed;
  mixed.mix_seed = 5;
  auto a = chains_at(C, spec.eigenvalues[1].eigenvalue,
                     spec.eigenvalues[1].sizes, plain);
  auto b = chains_at(C, spec.eigenvalues[1].eigenvalue,
                     spec.eigenvalues[1].sizes, mixed);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  // Union of chain columns spans the same invariant subspace.
  CMat Sa(8, 4), Sb(8, 4);
  Sa << a[0], a[1];
  Sb << b[0], b[1];
  CHECK(min_subspace_cosine(orth(Sa), orth(Sb)) > 1 - 1e-8);
}

TEST_CASE("centralizer basis counts, residuals and dimension formula") {
  // C = I_2: everything commutes.
  JordanSpec id2 = jordan_structure(CMat::Identity(2, 2));
  auto b1 = centralizer_basis(CMat::Identity(2, 2), id2);
  CHECK(b1.size() == 4);
  CHECK(span_of(b1).cols() == 4);
  CHECK(centralizer_dimension(id2) == 4);

  // Nilpotent with blocks [3,2]: dimension 2+3+2*min(2,3) = 9.
  CMat N = CMat::Zero(5, 5);
  N(0, 1) = 1.0;
  N(2, 3) = 1.0;
  N(3, 4) = 1.0;
  JordanSpec nspec = jordan_structure(N);
  CHECK(centralizer_dimension(nspec) == 9);
  auto bn = centralizer_basis(N, nspec);
  CHECK(bn.size() == 9);
  CHECK(span_of(bn).cols() == 9);
  for (const auto& Z : bn) {
    const double nz = Z.norm();
    CHECK((Z * N - N * Z).norm() <= 1e-8 * std::max(1.0, N.norm() * nz));
  }

  // Random cosquare: dimension matches the commutation-operator nullity
  // and the basis spans exactly its nullspace.
  CMat J = random_cmat(4, 4, 77);
  CMat C = cosquare(J, Involution::T);
  JordanSpec spec = jordan_structure(C);
  const int n = 4;
  CMat K = CMat::Zero(n * n, n * n);  // Z -> ZC - CZ on vec(Z)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        K(i * n + j, i * n + k) += C(k, j);
        K(i * n + j, k * n + j) -= C(i, k);
      }
  CMat null = nullspace(K, 1e-10);
  CHECK(centralizer_dimension(spec) == null.cols());
  auto bc = centralizer_basis(C, spec);
  CHECK(static_cast<int>(bc.size()) == null.cols());
  CMat Qb = span_of(bc);
  REQUIRE(Qb.cols() == null.cols());
  CHECK(min_subspace_cosine(Qb, null) > 1 - 1e-8);

  // Chain-choice independence of the span.
  ChainOptions mixed;
  mixed.mix_seed = 9;
  auto bmix = centralizer_basis(C, spec, eigen_chains(C, spec, mixed),
                                eigen_chains(C.transpose(), spec, mixed));
  CHECK(min_subspace_cosine(span_of(bmix), Qb) > 1 - 1e-8);
}

TEST_CASE("alt representative flips to the partner eigenvalue") {
  CMat C = cosquare(example_j(), Involution::T);
  JordanSpec spec = jordan_structure(C);
  ChainOptions alt;
  alt.alt_representative = true;
  auto sets = jordan_chains(C, spec, Involution::T, Field::Complex, alt);
  REQUIRE(sets.size() == 1);
  CHECK(near_eig(sets[0].rep, 0.5));
  CMat Jb = jordan_block(sets[0].rep, 2);
  CHECK((C * sets[0].W[0] - sets[0].W[0] * Jb).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("jordan spec json round-trips with pairing classes") {
  JordanSpec spec = jordan_structure(cosquare(example_j(), Involution::T));
  nlohmann::json j =
      jordan_spec_to_json(spec, Involution::T, Field::Complex);
  CHECK(j.contains("pairing"));
  CHECK(j["pairing"].size() == 1);
  CHECK(j["pairing"][0].size() == 2);
  JordanSpec back = jordan_spec_from_json(j);
  REQUIRE(back.eigenvalues.size() == spec.eigenvalues.size());
  for (std::size_t i = 0; i < back.eigenvalues.size(); ++i) {
    CHECK(back.eigenvalues[i].eigenvalue == spec.eigenvalues[i].eigenvalue);
    CHECK(back.eigenvalues[i].sizes == spec.eigenvalues[i].sizes);
  }
}
