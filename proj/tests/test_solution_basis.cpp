#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "autgrp/solution_basis.hpp"

#include <algorithm>
#include <string>
#include <vector>

using namespace autgrp::core_linalg;
using namespace autgrp::eigenstructure;
using namespace autgrp::pencil_kronecker;
using namespace autgrp::solution_basis;

namespace {

// 4x4 with cosquare Jordan form J_2^2 + J_2^{1/2} and a printed basis.
CMat example_j1() {
  RMat J(4, 4);
  J << 5, 6, -9, -9, 1, 0, -1, 1, -3, -6, 7, 7, -6, 2, 2, 0;
  return J.cast<Cx>();
}

// 4x4 real with nonreal cosquare eigenvalues 1 +- i, (1 -+ i)/2.
CMat example_j2() {
  RMat J(4, 4);
  J << -1, 0, -3, -2, 1, 0, 1, 0, -2, 2, 4, -1, 0, -1, -1, -2;
  return J.cast<Cx>();
}

// 4x4 real whose automorphism group tangent space has the known basis
// m1/m2 below.
CMat example_j12() {
  RMat J(4, 4);
  J << 1, 1, -1, -1, -1, 1, 0, -1, 1, 0, 1, -1, 1, 1, 1, 1;
  return J.cast<Cx>();
}

CMat mat4(std::initializer_list<double> v) {
  RMat M(4, 4);
  int i = 0;
  for (double x : v) M(i / 4, i % 4) = x, ++i;
  return M.cast<Cx>();
}

// Wrap raw matrices for span comparison against computed bases.
SolutionBasis manual_basis(std::vector<CMat> els, Involution inv) {
  SolutionBasis b;
  b.inv = inv;
  b.elements = std::move(els);
  return b;
}

double defining_residual(const CMat& X, const CMat& J, Involution inv,
                         int sign) {
  return (adj(X, inv) * J + static_cast<double>(sign) * (J * X)).norm();
}

// Draws whose vec-operator singular values keep a clean gap between
// "zero" and "nonzero" for both signs. Rank-deficient random products
// occasionally land eigenvalues a hair away from an exceptional
// configuration, where the solution dimension itself is tolerance-
// dependent; those draws are not test data.
bool clean_gap(const CMat& Jm, Involution inv) {
  for (int sign : {+1, -1}) {
    const RVec sv = inv == Involution::H
                        ? svdvals(h_operator(Jm, sign).cast<Cx>())
                        : svdvals(t_operator(Jm, sign));
    const double top = sv.size() ? sv(0) : 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-9 * top && sv(i) < 1e-5 * top) return false;
  }
  return true;
}

// Nonsingular draw with the same screening plus an invertibility floor.
CMat draw_nonsingular(int n, bool cplx, Involution inv, std::uint64_t seed) {
  Rng rng(seed);
  for (;;) {
    const CMat J = random_gaussian(n, n, rng, cplx);
    const RVec sv = svdvals(J);
    if (sv(sv.size() - 1) <= 1e-4 * sv(0)) continue;
    if (clean_gap(J, inv)) return J;
  }
}

CMat draw_rank_deficient(int n, int r, bool cplx, Involution inv,
                         std::uint64_t seed) {
  Rng rng(seed);
  for (;;) {
    const CMat J = random_gaussian(n, r, rng, cplx) *
                   random_gaussian(r, n, rng, cplx);
    if (clean_gap(J, inv)) return J;
  }
}

Mat wrap(const CMat& J, bool cplx) {
  return cplx ? Mat::complex(J) : Mat::real(J.real());
}

}  // namespace

TEST_CASE("pair builders reproduce the printed 4x4 solutions") {
  const CMat J = example_j1();
  CMat W(4, 2), U(4, 2);
  W << 6, 1, 12, 8, 6, 1, 0, 0;
  U << -4, 7, -8, 15, -4, 8, -4, 7;

  const CMat X1 = build_pair_matrix(PairKind::X_T, 1, J, W, U);
  const CMat X2 = build_pair_matrix(PairKind::X_T, 2, J, W, U);
  const CMat P1 = 24.0 * mat4({5, -1, -3, 0, 10, -2, -6, 0, 5, -1, -3, 0, 4,
                               0, -4, 0});
  const CMat P2 = 8.0 * mat4({-23, 4, 12, 6, -46, 5, 30, 12, -26, 4, 15, 6,
                              -16, 0, 16, 3});
  CHECK((X1 - P1).norm() < 1e-9);
  CHECK((X2 - P2).norm() < 1e-9);
  CHECK(defining_residual(X1, J, Involution::T, +1) < 1e-9);
  CHECK(defining_residual(X2, J, Involution::T, +1) < 1e-9);

  // Realified kind on the second example; the published matrices carry a
  // display factor 1/9 relative to the raw builder output.
  const CMat J2 = example_j2();
  CMat Wl(4, 2), Ul(4, 2);
  Wl << 2, 3, 13, 0, -2, -3, -4, -6;
  Ul << -5, 0, -4, 3, -1, -3, 1, 3;
  const CMat A1 = build_pair_matrix(PairKind::X_R, 1, J2, Wl, Ul);
  const CMat A2 = build_pair_matrix(PairKind::X_R, 1, J2, Ul, Wl);
  const CMat M1 = 3.0 * mat4({13, -8, -34, 14, 2, -13, -62, -20, 8, 8, 7, 10,
                              -32, 16, 20, -7});
  const CMat M2 = 3.0 * mat4({-39, 9, 22, -32, -51, 39, 86, -10, -9, -9, -16,
                              5, 36, -18, 10, 16});
  CHECK((A1 - M1).norm() < 1e-9);
  CHECK((A2 - M2).norm() < 1e-9);
  CHECK(defining_residual(A1, J2, Involution::T, +1) < 1e-9);

  // Shape and index validation.
  CHECK_THROWS_AS(build_pair_matrix(PairKind::X_T, 3, J, W, U),
                  std::domain_error);
  CHECK_THROWS_AS(build_pair_matrix(PairKind::X_T, 0, J, W, U),
                  std::domain_error);
  CHECK_THROWS_AS(build_pair_matrix(PairKind::X_T, 1, J, W.topRows(3), U),
                  std::domain_error);
  CHECK_THROWS_AS(build_pair_matrix(PairKind::X_R, 1, J2, Wl.leftCols(1), Ul),
                  std::domain_error);
}

TEST_CASE("centralizer projection splits into the two spaces") {
  // J = I: the projection with the literal formula sign -1 is Z - Z^T,
  // which kills symmetric Z entirely.
  const CMat I4 = CMat::Identity(4, 4);
  Rng rng(41);
  const CMat Z = random_gaussian(4, 4, rng, false);
  CHECK((project_centralizer(Z, I4, Involution::T, -1) - (Z - Z.transpose()))
            .norm() < 1e-12);
  CHECK(project_centralizer(I4, I4, Involution::T, -1).norm() < 1e-14);

  // The halved variants reassemble Z.
  const CMat J = example_j1();
  const CMat Zc = random_gaussian(4, 4, rng, false);
  const CMat Hm = project_centralizer(Zc, J, Involution::T, -1, true);
  const CMat Hp = project_centralizer(Zc, J, Involution::T, +1, true);
  CHECK((Hm + Hp - Zc).norm() < 1e-10);

  // On centralizer elements of the cosquare the halves land in sol and
  // cosol respectively.
  const CMat C = cosquare(J, Involution::T);
  for (const CMat& Zk : centralizer_basis(C, jordan_structure(C))) {
    const CMat S = project_centralizer(Zk, J, Involution::T, -1);
    const CMat K = project_centralizer(Zk, J, Involution::T, +1);
    CHECK(defining_residual(S, J, Involution::T, +1) < 1e-9);
    CHECK(defining_residual(K, J, Involution::T, -1) < 1e-9);
  }

  CMat sing = CMat::Zero(3, 3);
  sing(0, 1) = 1.0;
  CHECK_THROWS_AS(project_centralizer(I4.topLeftCorner(3, 3), sing,
                                      Involution::T, -1),
                  SingularInput);
}

TEST_CASE("small fixed matrices have the classical solution spaces") {
  // sol(I) over the reals: skew-symmetric. cosol(I): symmetric.
  const Mat I2 = Mat::real(RMat::Identity(2, 2));
  const SolutionBasis skew = sol_basis(I2, Involution::T);
  REQUIRE(skew.dim() == 1);
  CHECK(skew.field == Field::Real);
  CHECK(skew.real_space);
  CMat Om(2, 2);
  Om << 0, 1, -1, 0;
  CHECK(span_equal(skew, manual_basis({Om}, Involution::T)));
  CHECK(cosol_basis(I2, Involution::T).dim() == 3);

  // The symplectic form: sol is sp(2) (dimension 3), cosol the
  // Omega-commuting symmetric complement.
  const Mat Omega = Mat::real(Om.real());
  CHECK(sol_basis(Omega, Involution::T).dim() == 3);
  CHECK(cosol_basis(Omega, Involution::T).dim() == 1);

  // Conjugate-transpose route on the identity: skew-Hermitian matrices,
  // a real space of dimension n^2.
  const Mat I2c = Mat::complex(CMat::Identity(2, 2));
  const SolutionBasis sh = sol_basis(I2c, Involution::H);
  CHECK(sh.dim() == 4);
  CHECK(sh.real_space);
  CHECK(sh.real_dim() == 4);
  for (int i = 0; i < sh.dim(); ++i) CHECK(sh.residuals[i] < 1e-10);

  // Degenerate corner: an empty matrix has an empty basis.
  CHECK(sol_basis(Mat::real(RMat(0, 0)), Involution::T).dim() == 0);
}

TEST_CASE("worked 4x4 examples give the printed bases") {
  const CMat J1 = example_j1();
  const CMat P1 = mat4({5, -1, -3, 0, 10, -2, -6, 0, 5, -1, -3, 0, 4, 0, -4,
                        0});
  const CMat P2 = mat4({-23, 4, 12, 6, -46, 5, 30, 12, -26, 4, 15, 6, -16, 0,
                        16, 3});

  // Complex route: a two dimensional complex space.
  const SolutionBasis bc = sol_basis(Mat::complex(J1), Involution::T);
  REQUIRE(bc.dim() == 2);
  CHECK(bc.field == Field::Complex);
  CHECK(!bc.real_space);
  CHECK(bc.real_dim() == 4);
  CHECK(span_equal(bc, manual_basis({P1, P2}, Involution::T)));

  // Real route: same J, same dimension, real basis.
  const SolutionBasis br = sol_basis(Mat::real(J1.real()), Involution::T);
  REQUIRE(br.dim() == 2);
  CHECK(br.field == Field::Real);
  for (const CMat& X : br.elements) CHECK(X.imag().norm() == 0.0);
  CHECK(span_equal(br, manual_basis({P1, P2}, Involution::T)));

  // Real J with nonreal cosquare eigenvalues.
  const CMat J2 = example_j2();
  const CMat M1 = mat4({13, -8, -34, 14, 2, -13, -62, -20, 8, 8, 7, 10, -32,
                        16, 20, -7});
  const CMat M2 = mat4({-39, 9, 22, -32, -51, 39, 86, -10, -9, -9, -16, 5, 36,
                        -18, 10, 16});
  const SolutionBasis b2 = sol_basis(Mat::real(J2.real()), Involution::T);
  REQUIRE(b2.dim() == 2);
  CHECK(span_equal(b2, manual_basis({M1, M2}, Involution::T)));

  const CMat J12 = example_j12();
  const CMat B1 = mat4({0, 1, -1, -2, -1, 0, -1, -1, 1, 1, 0, -1, 2, 1, 1,
                        0});
  const CMat B2 = mat4({0, -1, 1, -1, 1, 0, -2, 1, -1, 2, 0, 1, 1, -1, -1,
                        0});
  const SolutionBasis b12 = sol_basis(Mat::real(J12.real()), Involution::T);
  REQUIRE(b12.dim() == 2);
  CHECK(span_equal(b12, manual_basis({B1, B2}, Involution::T)));
}

TEST_CASE("dimension formulas on hand-checked structures") {
  // Identity: sol is the skew-symmetric matrices.
  for (int n : {2, 3, 5}) {
    const auto spec =
        kronecker_structure(Mat::real(RMat::Identity(n, n)), Involution::T);
    const DimReport r = dim_from_structure(spec, +1);
    CHECK(r.D_1 == n * (n - 1) / 2);
    CHECK(r.total == n * (n - 1) / 2);
    const DimReport rc = dim_from_structure(spec, -1);
    CHECK(rc.total == n * (n + 1) / 2);
  }

  // 4x4 symplectic form: sp(4) has dimension 10.
  RMat Om4 = RMat::Zero(4, 4);
  Om4.topRightCorner(2, 2) = RMat::Identity(2, 2);
  Om4.bottomLeftCorner(2, 2) = -RMat::Identity(2, 2);
  const auto so = kronecker_structure(Mat::real(Om4), Involution::T);
  CHECK(dim_from_structure(so, +1).total == 10);

  // Singular pieces: the nilpotent 2x2 and diag(1, 0), both checked
  // against the brute-force nullity.
  RMat N2 = RMat::Zero(2, 2);
  N2(0, 1) = 1.0;
  for (int sign : {+1, -1}) {
    const Mat Jn = Mat::real(N2);
    const DimReport r =
        dim_from_structure(kronecker_structure(Jn, Involution::T), sign, Jn);
    CHECK(r.oracle_nullity >= 0);
    CHECK(r.agrees);
  }
  RMat D10 = RMat::Zero(2, 2);
  D10(0, 0) = 1.0;
  const Mat Jd = Mat::real(D10);
  const auto sd = kronecker_structure(Jd, Involution::T);
  const DimReport rd = dim_from_structure(sd, +1, Jd);
  CHECK(rd.D_L == 1);
  CHECK(rd.D_I == 1);
  CHECK(rd.total == 2);
  CHECK(rd.agrees);
}

TEST_CASE("dimension formulas agree with the oracle on random draws") {
  int checked = 0;
  for (int n = 2; n <= 6; ++n)
    for (int route = 0; route < 3; ++route) {
      const bool cplx = route > 0;
      const Involution inv = route == 2 ? Involution::H : Involution::T;
      // Nonsingular and rank-deficient draws for each route.
      for (int r : {n, n - 1}) {
        const std::uint64_t seed = 9000 + 100 * n + 10 * route + r;
        const CMat Jm = r == n ? draw_nonsingular(n, cplx, inv, seed)
                               : draw_rank_deficient(n, r, cplx, inv, seed);
        const Mat J = wrap(Jm, cplx);
        const auto spec = kronecker_structure(J, inv);
        for (int sign : {+1, -1}) {
          const DimReport rep = dim_from_structure(spec, sign, J);
          CHECK(rep.oracle_nullity >= 0);
          CHECK(rep.agrees);
          ++checked;
        }
      }
    }
  CHECK(checked == 60);
}

TEST_CASE("bases match the oracle across routes and ranks") {
  for (int n = 2; n <= 6; ++n)
    for (int route = 0; route < 3; ++route) {
      const bool cplx = route > 0;
      const Involution inv = route == 2 ? Involution::H : Involution::T;
      for (int r : {n, n - 1, n - 2}) {
        if (r < 1) continue;
        const std::uint64_t seed = 31000 + 100 * n + 10 * route + r;
        const CMat Jm = r == n ? draw_nonsingular(n, cplx, inv, seed)
                               : draw_rank_deficient(n, r, cplx, inv, seed);
        const Mat J = wrap(Jm, cplx);
        const double scale = Jm.norm();
        for (int sign : {+1, -1}) {
          const SolutionBasis b = basis_of(J, inv, sign);
          const SolutionBasis o = oracle_basis(J, inv, sign);
          CHECK(b.dim() == o.dim());
          CHECK(span_equal(b, o));
          for (double res : b.residuals) CHECK(res < 1e-7 * (1.0 + scale));
          if (J.field == Field::Real && inv == Involution::T)
            for (const CMat& X : b.elements) CHECK(X.imag().norm() == 0.0);
        }
      }
    }
}

TEST_CASE("sol and cosol assemble the centralizer") {
  for (int n = 2; n <= 6; ++n)
    for (int route = 0; route < 3; ++route) {
      const bool cplx = route > 0;
      const Involution inv = route == 2 ? Involution::H : Involution::T;
      const CMat Jm =
          draw_nonsingular(n, cplx, inv, 52000 + 10 * n + route);
      const Mat J = wrap(Jm, cplx);
      const SolutionBasis s = sol_basis(J, inv);
      const SolutionBasis c = cosol_basis(J, inv);
      const int cent =
          centralizer_dimension(jordan_structure(cosquare(Jm, inv)));
      if (inv == Involution::H)
        // Real decomposition of a complex centralizer.
        CHECK(s.real_dim() + c.real_dim() == 2 * cent);
      else
        CHECK(s.dim() + c.dim() == cent);
    }
}

TEST_CASE("multiplying sol by i lands in cosol on the conjugate route") {
  for (int n : {2, 4, 5}) {
    const CMat Jm = draw_nonsingular(n, true, Involution::H, 61000 + n);
    const Mat J = wrap(Jm, true);
    const SolutionBasis s = sol_basis(J, Involution::H);
    const SolutionBasis c = cosol_basis(J, Involution::H);
    std::vector<CMat> rotated;
    for (const CMat& X : s.elements) rotated.push_back(Cx(0, 1) * X);
    SolutionBasis rot = manual_basis(std::move(rotated), Involution::H);
    CHECK(span_equal(rot, c));
  }
}

TEST_CASE("span does not depend on chain choices or representatives") {
  struct Draw {
    bool cplx;
    Involution inv;
    std::uint64_t seed;
  };
  // One per route, plus a real matrix with nonreal cosquare eigenvalues
  // (the realified chains are the fiddliest path).
  const std::vector<Draw> draws = {{false, Involution::T, 71001},
                                   {true, Involution::T, 71002},
                                   {true, Involution::H, 71003}};
  for (const Draw& d : draws)
    for (int sign : {+1, -1}) {
      const CMat Jm = draw_nonsingular(5, d.cplx, d.inv, d.seed);
      const Mat J = wrap(Jm, d.cplx);
      const SolutionBasis base = basis_of(J, d.inv, sign);
      for (std::uint64_t mix : {std::uint64_t{7}, std::uint64_t{99}}) {
        BasisOptions o;
        o.mix_seed = mix;
        const SolutionBasis alt = basis_of(J, d.inv, sign, o);
        CHECK(alt.dim() == base.dim());
        CHECK(span_equal(alt, base));
      }
      BasisOptions o;
      o.alt_representative = true;
      const SolutionBasis swapped = basis_of(J, d.inv, sign, o);
      CHECK(span_equal(swapped, base));
    }

  const Mat J2 = Mat::real(example_j2().real());
  BasisOptions o;
  o.mix_seed = 5;
  o.alt_representative = true;
  CHECK(span_equal(sol_basis(J2, Involution::T, o),
                   sol_basis(J2, Involution::T)));
}

TEST_CASE("span comparison fundamentals") {
  const Mat J = Mat::real(example_j1().real());
  const SolutionBasis b = sol_basis(J, Involution::T);
  CHECK(span_equal(b, b));

  SolutionBasis scaled = b;
  for (CMat& X : scaled.elements) X *= -3.25;
  CHECK(span_equal(b, scaled));

  SolutionBasis shorter = b;
  shorter.elements.pop_back();
  CHECK(!span_equal(b, shorter));

  SolutionBasis other = b;
  other.elements[0] = CMat::Identity(4, 4);
  CHECK(!span_equal(b, other));
}

TEST_CASE("oracle shapes on trivial inputs") {
  const SolutionBasis o1 =
      oracle_basis(Mat::real(RMat::Identity(2, 2)), Involution::T, +1);
  CHECK(o1.dim() == 1);

  // The zero matrix: every X solves both equations.
  const Mat Z = Mat::real(RMat::Zero(2, 2));
  for (int sign : {+1, -1}) {
    CHECK(oracle_basis(Z, Involution::T, sign).dim() == 4);
    const SolutionBasis b = basis_of(Z, Involution::T, sign);
    CHECK(b.dim() == 4);
    CHECK(span_equal(b, oracle_basis(Z, Involution::T, sign)));
  }
}

TEST_CASE("singular inputs route through the pencil machinery") {
  RMat D = RMat::Zero(2, 2);
  D(0, 0) = 1.0;
  const SolutionBasis b = sol_basis(Mat::real(D), Involution::T);
  REQUIRE(b.dim() == 2);
  for (const SourceTag& t : b.sources) CHECK(t.builder == "pencil");
  for (double r : b.residuals) CHECK(r < 1e-10);

  // Nonsingular elements carry their builder provenance instead.
  const SolutionBasis bn =
      sol_basis(Mat::real(example_j1().real()), Involution::T);
  for (const SourceTag& t : bn.sources) CHECK(t.builder == "X_T");
}

TEST_CASE("serialization carries the basis and is deterministic") {
  const Mat J = Mat::real(example_j1().real());
  const SolutionBasis b = sol_basis(J, Involution::T);
  const auto spec = kronecker_structure(J, Involution::T);
  const DimReport r = dim_from_structure(spec, +1, J);
  const nlohmann::json js = solution_basis_to_json(b, &r);

  CHECK(js["space"] == "sol");
  CHECK(js["involution"] == "T");
  CHECK(js["field"] == "real");
  CHECK(js["dim"] == 2);
  CHECK(js["real_dim"] == 2);
  CHECK(js["elements"].size() == 2);
  CHECK(js["sources"].size() == 2);
  CHECK(js["residual_max"].get<double>() < 1e-10);
  CHECK(js["dim_report"]["total"] == 2);
  CHECK(js["dim_report"]["agrees"] == true);

  // Elements round-trip through the matrix schema.
  const Mat back = mat_from_json(js["elements"][0]);
  CHECK(back.field == Field::Real);
  CHECK((back.a - b.elements[0]).norm() < 1e-15);

  // Identical inputs give byte-identical reports.
  const nlohmann::json js2 =
      solution_basis_to_json(sol_basis(J, Involution::T), &r);
  CHECK(js.dump() == js2.dump());
}
