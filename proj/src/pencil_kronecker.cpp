#include "autgrp/pencil_kronecker.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

namespace autgrp::pencil_kronecker {

using core_linalg::adj;
using core_linalg::backwards_identity;
using core_linalg::comb;
using core_linalg::CVec;
using core_linalg::field_name;
using core_linalg::involution_name;
using core_linalg::lstsq;
using core_linalg::nullspace_abs;
using core_linalg::orth;
using core_linalg::Rng;
using core_linalg::RVec;
using core_linalg::StructureError;
using core_linalg::svd_left;
using core_linalg::svdvals;
using eigenstructure::JordanSpec;
using eigenstructure::PairClass;

namespace {

constexpr double kTiny = 1e-300;

// Orthonormality cut shared by the chain routines; matches the scale of
// the unit-norm vectors they operate on.
constexpr double kOrthTol = 1e-10;

// Acceptance floor for chain-top singular values: tops must stick out of
// the polluted/lower-level span by a non-marginal amount.
constexpr double kTopSv = 1e-7;

double spec_norm(const CMat& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  return svdvals(A)(0);
}

int rank_abs(const CMat& A, double thresh) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  const RVec s = svdvals(A);
  int r = 0;
  for (int i = 0; i < s.size(); ++i) r += s(i) > thresh ? 1 : 0;
  return r;
}

// One right-staircase pass on A - lambda B with an absolute cutoff.
// Ad/Bd hold the deflated copies of the arguments in call order; when
// the caller reverses the roles of A and B, the remainder comes back
// reversed too and must be swapped on assignment.
struct StaircaseOut {
  std::vector<int> nus, rhos;
  CMat Ad, Bd;
};

StaircaseOut staircase_counts(CMat Ac, CMat Bc, double thresh) {
  StaircaseOut out;
  while (true) {
    const int nr = static_cast<int>(Ac.rows());
    const int nc = static_cast<int>(Ac.cols());
    if (nc == 0) break;
    CMat N = nr > 0 ? nullspace_abs(Ac, thresh) : CMat(CMat::Identity(nc, nc));
    const int nu = static_cast<int>(N.cols());
    if (nu == 0) break;
    CMat BN = Bc * N;
    out.nus.push_back(nu);
    out.rhos.push_back(rank_abs(BN, thresh));
    CMat U2 = nullspace_abs(BN.adjoint(), thresh);
    // N is orthonormal, so its complement is structural (all singular
    // values are exactly 1); tying it to the data threshold would stop
    // the deflation from shrinking once thresh >= 1 and hang the loop.
    CMat Nc = nullspace_abs(N.adjoint(), 0.5);
    CMat A2 = U2.adjoint() * Ac * Nc;
    CMat B2 = U2.adjoint() * Bc * Nc;
    Ac = std::move(A2);
    Bc = std::move(B2);
  }
  out.Ad = std::move(Ac);
  out.Bd = std::move(Bc);
  return out;
}

// Staircase counts -> singular minimal indices (ascending) and the
// Jordan sizes of the eigenvalue the pass deflated (descending).
std::pair<std::vector<int>, std::vector<int>> counts_to_structure(
    const std::vector<int>& nus, const std::vector<int>& rhos) {
  const int K = static_cast<int>(nus.size());
  std::vector<int> s_list, ge(K, 0), sizes;
  for (int k = 1; k <= K; ++k) {
    const int cnt = nus[k - 1] - rhos[k - 1];
    if (cnt < 0) throw StructureError("staircase: negative singular count");
    s_list.insert(s_list.end(), cnt, k - 1);
    int tail = 0;
    for (int j = k + 1; j <= K; ++j) tail += nus[j - 1] - rhos[j - 1];
    ge[k - 1] = rhos[k - 1] - tail;
  }
  for (int k = 1; k <= K; ++k) {
    const int cnt = ge[k - 1] - (k < K ? ge[k] : 0);
    if (cnt < 0) throw StructureError("staircase: inconsistent rank profile");
    sizes.insert(sizes.end(), cnt, k);
  }
  std::sort(s_list.begin(), s_list.end());
  std::sort(sizes.begin(), sizes.end(), std::greater<int>());
  return {s_list, sizes};
}

std::vector<KroneckerBlock> build_blocks(const std::vector<int>& s_list,
                                         const std::vector<int>& t_list,
                                         const JordanSpec& core,
                                         Involution inv, Field field) {
  std::vector<KroneckerBlock> blocks;
  for (int s : s_list)
    blocks.push_back({BlockKind::SingularPair, s, Cx(0.0, 0.0), 1});
  for (int t : t_list)
    blocks.push_back({BlockKind::ZeroInfPair, t, Cx(0.0, 0.0), 1});
  if (!core.eigenvalues.empty()) {
    for (const PairClass& cl : eigenstructure::pair_classes(core, inv, field)) {
      const int copies = static_cast<int>(cl.members.size());
      for (int m : cl.sizes) {
        if (copies == 1)
          blocks.push_back({BlockKind::Jordan, m, cl.rep, 1});
        else
          blocks.push_back({BlockKind::PairedJordan, m, cl.rep, copies});
      }
    }
  }
  return blocks;
}

// a-chains of the singular blocks: A a_1 = 0, A a_{j+1} = B a_j,
// B a_{s+1} = 0, one chain per entry of s_list (widths ascending).
// Shifted copies of the lower-degree chains are projected out so every
// degree contributes genuinely new chains.
std::vector<CMat> minimal_right_polychains(const CMat& A, const CMat& B,
                                           const std::vector<int>& s_list,
                                           double tol) {
  const int n = static_cast<int>(A.cols());
  const double thresh = tol * std::max(spec_norm(A) + spec_norm(B), kTiny);
  std::vector<CMat> chains;
  const std::set<int> degrees(s_list.begin(), s_list.end());
  for (int d : degrees) {
    const int cnt =
        static_cast<int>(std::count(s_list.begin(), s_list.end(), d));
    const int nb = d + 1;
    CMat M = CMat::Zero((d + 2) * n, nb * n);
    M.block(0, 0, n, n) = A;
    for (int j = 1; j <= d; ++j) {
      M.block(j * n, j * n, n, n) = A;
      M.block(j * n, (j - 1) * n, n, n) = -B;
    }
    M.block((d + 1) * n, d * n, n, n) = B;
    CMat Nd = nullspace_abs(M, thresh);

    std::vector<CVec> shifts;
    for (const CMat& ch : chains) {
      const int s = static_cast<int>(ch.cols()) - 1;
      for (int off = 0; off <= d - s; ++off) {
        CVec v = CVec::Zero(nb * n);
        for (int j = 0; j <= s; ++j) v.segment((off + j) * n, n) = ch.col(j);
        shifts.push_back(std::move(v));
      }
    }
    CMat Sd(nb * n, static_cast<int>(shifts.size()));
    for (std::size_t c = 0; c < shifts.size(); ++c)
      Sd.col(static_cast<int>(c)) = shifts[c];
    CMat Qp = orth(Sd, kOrthTol);
    CMat cand = Nd - Qp * (Qp.adjoint() * Nd);
    RVec sv;
    CMat u = svd_left(cand, &sv);
    if (u.cols() < cnt || (cnt > 0 && sv(cnt - 1) < kTopSv)) {
      std::ostringstream os;
      os << "minimal chains: wanted " << cnt << " at degree " << d;
      throw StructureError(os.str());
    }
    for (int c = 0; c < cnt; ++c) {
      CMat ch(n, nb);
      for (int j = 0; j < nb; ++j) ch.col(j) = u.col(c).segment(j * n, n);
      chains.push_back(std::move(ch));
    }
  }
  std::stable_sort(
      chains.begin(), chains.end(),
      [](const CMat& a, const CMat& b) { return a.cols() < b.cols(); });
  return chains;
}

// Complete the chain below a given top: M w_1 = 0, M w_k = B w_{k-1},
// B w_{size-1} = M top.
std::vector<CVec> chain_down(const CMat& M, const CMat& B, const CVec& top,
                             int size, double tol = 1e-6) {
  if (size == 1) return {top};
  const int n = static_cast<int>(top.size());
  const int r = size;
  CMat S = CMat::Zero(n * r, n * (r - 1));
  CMat rhs = CMat::Zero(n * r, 1);
  S.block(0, 0, n, n) = M;
  for (int k = 2; k <= r - 1; ++k) {
    S.block((k - 1) * n, (k - 1) * n, n, n) = M;
    S.block((k - 1) * n, (k - 2) * n, n, n) = -B;
  }
  S.block((r - 1) * n, (r - 2) * n, n, n) = B;
  rhs.block((r - 1) * n, 0, n, 1) = M * top;
  CMat x = lstsq(S, rhs);
  const double scale = std::max({spec_norm(M), spec_norm(B), kTiny});
  const double resid = (S * x - rhs).norm();
  if (resid > tol * scale) {
    std::ostringstream os;
    os << "chain completion inconsistent: resid=" << resid;
    throw StructureError(os.str());
  }
  std::vector<CVec> ws;
  for (int k = 0; k < r - 1; ++k) ws.push_back(x.col(0).segment(k * n, n));
  ws.push_back(top);
  return ws;
}

// Chains (A - lam B) w_1 = 0, (A - lam B) w_k = B w_{k-1}; one chain per
// entry of `sizes`, returned widest first. `pollution` holds chain
// stacks whose level-k columns must be excluded from the level-k tops
// (the singular blocks shadow every regular eigenvalue).
std::vector<CMat> pencil_chains_at(const CMat& A, const CMat& B, Cx lam,
                                   std::vector<int> sizes,
                                   const std::vector<CMat>& pollution,
                                   double tol) {
  const int n = static_cast<int>(A.rows());
  const CMat M = A - lam * B;
  const double thresh =
      tol * std::max(spec_norm(A) + std::abs(lam) * spec_norm(B), kTiny);
  std::sort(sizes.begin(), sizes.end(), std::greater<int>());
  const int r = sizes.empty() ? 0 : sizes[0];
  if (r == 0) return {};

  // Filtration levels: nullspaces of M relative to the image chain.
  std::vector<CMat> Graw;
  for (int k = 1; k <= r; ++k) {
    CMat N;
    if (k == 1) {
      N = nullspace_abs(M, thresh);
    } else {
      CMat T = orth(B * Graw.back(), kOrthTol);
      N = nullspace_abs(M - T * (T.adjoint() * M), thresh);
    }
    Graw.push_back(orth(N, kOrthTol));
  }

  std::map<int, std::vector<CVec>> used;
  std::vector<CMat> chains;
  const std::set<int, std::greater<int>> uniq(sizes.begin(), sizes.end());
  for (int size : uniq) {
    const int cnt =
        static_cast<int>(std::count(sizes.begin(), sizes.end(), size));
    const CMat& G = Graw[size - 1];
    std::vector<CMat> parts;
    for (const CMat& ch : pollution)
      if (ch.cols() >= size) parts.push_back(ch.col(size - 1));
    for (const CVec& v : used[size]) parts.push_back(v);
    if (size >= 2) parts.push_back(Graw[size - 2]);
    int stack_cols = 0;
    for (const CMat& p : parts) stack_cols += static_cast<int>(p.cols());
    CMat stack(n, stack_cols);
    int at = 0;
    for (const CMat& p : parts) {
      stack.block(0, at, n, p.cols()) = p;
      at += static_cast<int>(p.cols());
    }
    CMat Y = orth(stack, kOrthTol);
    CMat PG = G - Y * (Y.adjoint() * G);
    RVec sv;
    CMat u = svd_left(PG, &sv);
    if (u.cols() < cnt || sv(cnt - 1) < kTopSv) {
      std::ostringstream os;
      os << "chain tops deficient at lambda=(" << lam.real() << ","
         << lam.imag() << ") size=" << size;
      throw StructureError(os.str());
    }
    for (int c = 0; c < cnt; ++c) {
      const std::vector<CVec> ws = chain_down(M, B, u.col(c), size);
      CMat W(n, size);
      for (int j = 0; j < size; ++j) W.col(j) = ws[j];
      chains.push_back(W);
      for (int lvl = 1; lvl <= size; ++lvl) used[lvl].push_back(W.col(lvl - 1));
    }
  }
  std::stable_sort(
      chains.begin(), chains.end(),
      [](const CMat& a, const CMat& b) { return a.cols() > b.cols(); });
  return chains;
}

// Level-k exclusion columns generated by the a-chains at an arbitrary
// eigenvalue: v_k = sum_j C(j, k-1) lam^{j-k+1} a_{j+1}. `rev` flips the
// chain for the reversed pencil.
std::vector<CMat> pollution_stacks(const std::vector<CMat>& a_chains, Cx lam,
                                   bool rev, int n) {
  std::vector<CMat> pols;
  for (const CMat& ch : a_chains) {
    const int s = static_cast<int>(ch.cols()) - 1;
    CMat cc = rev ? CMat(ch.rowwise().reverse()) : ch;
    CMat cols = CMat::Zero(n, s + 1);
    for (int k = 1; k <= s + 1; ++k) {
      CVec v = CVec::Zero(n);
      for (int j = k - 1; j <= s; ++j) {
        const Cx fac = comb(j, k - 1) *
                       (j > k - 1 ? std::pow(lam, j - k + 1) : Cx(1.0, 0.0));
        v += fac * cc.col(j);
      }
      cols.col(k - 1) = v;
    }
    pols.push_back(std::move(cols));
  }
  return pols;
}

struct SBlock {
  int s = 0;
  CMat W, Q, U, P;  // n x (2s+1) each
};

// S-block chain tuples in the original coordinates. The a-chain fixes
// half of W; the b-half is the best-conditioned member of its affine
// solution family over a fixed number of seeded draws. U and P are the
// column-permuted copies: S(l)^T Pi = Pi S(l) with
// Pi = diag(flip(s+1), flip(s)) turns the W relation into the U one.
std::pair<std::vector<SBlock>, std::vector<CMat>> s_block_chains(
    const CMat& A, const CMat& Js, const std::vector<int>& s_list, double tol,
    std::uint64_t seed) {
  const int n = static_cast<int>(A.rows());
  std::vector<CMat> a_chains = minimal_right_polychains(A, Js, s_list, tol);
  Rng rng(seed, 0);
  std::vector<SBlock> out;
  for (const CMat& ch : a_chains) {
    const int s = static_cast<int>(ch.cols()) - 1;
    if (s == 0) {
      SBlock b;
      b.s = 0;
      b.W = ch;
      b.Q = ch;
      b.U = ch;
      b.P = ch;
      out.push_back(std::move(b));
      continue;
    }
    const double thresh = tol * std::max(spec_norm(A) + spec_norm(Js), kTiny);
    CMat Nb;
    if (s == 1) {
      Nb = CMat::Identity(n, n);
    } else {
      // b-chain conditions J b_d = J* b_{d-1}, d = 2..s.
      CMat Msys = CMat::Zero((s - 1) * n, s * n);
      for (int d = 2; d <= s; ++d) {
        const int r0 = (d - 2) * n;
        Msys.block(r0, (d - 1) * n, n, n) = A;
        Msys.block(r0, (d - 2) * n, n, n) = -Js;
      }
      Nb = nullspace_abs(Msys, thresh);
    }
    const int need = 2 * (2 * s + 1);
    double best = -1.0;
    CMat bestW, bestQ;
    for (int trial = 0; trial < 60; ++trial) {
      CVec coef(Nb.cols());
      for (int i = 0; i < coef.size(); ++i) coef(i) = rng.cnormal();
      const CVec v = Nb * coef;
      CMat W(n, 2 * s + 1), Q(n, 2 * s + 1);
      for (int j = 0; j <= s; ++j) W.col(j) = ch.col(j);
      for (int j = 0; j < s; ++j) W.col(s + 1 + j) = v.segment(j * n, n);
      Q.col(0) = A * v.segment(0, n);
      for (int j = 0; j < s; ++j) Q.col(1 + j) = Js * v.segment(j * n, n);
      for (int j = 0; j < s; ++j) Q.col(1 + s + j) = Js * ch.col(j);
      CMat WQ(n, 2 * (2 * s + 1));
      WQ << W, Q;
      const RVec sv = svdvals(WQ);
      const double smin =
          sv(std::min<int>(need, static_cast<int>(sv.size())) - 1) /
          std::max(sv(0), kTiny);
      if (smin > best) {
        best = smin;
        bestW = W;
        bestQ = Q;
      }
    }
    CMat Pi = CMat::Zero(2 * s + 1, 2 * s + 1);
    for (int i = 0; i <= s; ++i) Pi(i, s - i) = 1.0;
    for (int i = 0; i < s; ++i) Pi(s + 1 + i, 2 * s - i) = 1.0;
    SBlock b;
    b.s = s;
    b.W = bestW;
    b.Q = bestQ;
    b.U = bestW * Pi;
    b.P = bestQ * Pi;
    out.push_back(std::move(b));
  }
  return {std::move(out), std::move(a_chains)};
}

struct WUQP {
  std::vector<CMat> W, U, Q, P;
};

// Regular-eigenvalue chain tuples. The U side runs on the reversed
// pencil (J*, J) at conj(lambda) for H; Q = J* W and P = J U.
WUQP chains_wuqp(const CMat& A, const CMat& Js, Involution inv, Cx lam,
                 const std::vector<int>& sizes,
                 const std::vector<CMat>& a_chains, double tol) {
  const int n = static_cast<int>(A.rows());
  WUQP out;
  out.W = pencil_chains_at(A, Js, lam, sizes,
                           pollution_stacks(a_chains, lam, false, n), tol);
  const Cx lam_u = inv == Involution::H ? std::conj(lam) : lam;
  out.U = pencil_chains_at(Js, A, lam_u, sizes,
                           pollution_stacks(a_chains, lam_u, true, n), tol);
  for (const CMat& W : out.W) out.Q.push_back(Js * W);
  for (const CMat& U : out.U) out.P.push_back(A * U);
  return out;
}

}  // namespace

const char* block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::SingularPair:
      return "L";
    case BlockKind::ZeroInfPair:
      return "Z";
    case BlockKind::Jordan:
      return "Jordan";
    case BlockKind::PairedJordan:
      return "PairedJordan";
  }
  return "?";
}

int KroneckerBlock::size() const {
  switch (kind) {
    case BlockKind::SingularPair:
      return 2 * param + 1;
    case BlockKind::ZeroInfPair:
      return 2 * param;
    case BlockKind::Jordan:
      return param;
    case BlockKind::PairedJordan:
      return copies * param;
  }
  return 0;
}

int KroneckerSpec::total_size() const {
  int t = 0;
  for (const KroneckerBlock& b : blocks) t += b.size();
  return t;
}

KroneckerSpec kronecker_structure(const Mat& J, Involution inv, double tol) {
  const CMat& A = J.a;
  if (A.rows() != A.cols())
    throw std::invalid_argument("kronecker_structure: J must be square");
  const int n = static_cast<int>(A.rows());

  KroneckerSpec spec;
  spec.inv = inv;
  spec.field = J.field;
  spec.n = n;
  if (n == 0) return spec;

  const CMat Js = adj(A, inv);
  const double scale = std::max(spec_norm(A), kTiny);
  const std::vector<double> ladder =
      tol >= 0 ? std::vector<double>{tol}
               : std::vector<double>{1e-7, 1e-9, 1e-11, 1e-13};
  std::string last_err = "no tolerance attempted";
  for (double rel : ladder) {
    const double thresh = rel * scale;
    try {
      // Right singular blocks + the eigenvalue-0 sizes.
      StaircaseOut st1 = staircase_counts(A, Js, thresh);
      auto [s_list, t_list] = counts_to_structure(st1.nus, st1.rhos);

      // Infinity pass with the pencil roles reversed; the remainder
      // comes back in reversed order as well.
      StaircaseOut st2 = staircase_counts(st1.Bd, st1.Ad, thresh);
      auto [s2, t2] = counts_to_structure(st2.nus, st2.rhos);
      const CMat B2 = st2.Ad;
      const CMat A2 = st2.Bd;

      // Left singular blocks via the transposed pencil.
      StaircaseOut st3 =
          staircase_counts(A2.transpose(), B2.transpose(), thresh);
      auto [s3, t3] = counts_to_structure(st3.nus, st3.rhos);
      const CMat& A3 = st3.Ad;
      const CMat& B3 = st3.Bd;

      if (A3.rows() != A3.cols()) throw StructureError("core not square");
      JordanSpec core;
      if (A3.rows() > 0)
        core = eigenstructure::jordan_structure(B3.partialPivLu().solve(A3));

      if (!s2.empty() || !t3.empty())
        throw StructureError("stray blocks in the mirror passes");
      if (t2 != t_list)
        throw StructureError("infinity pass does not mirror the zero sizes");
      if (s3 != s_list)
        throw StructureError("left pass does not mirror the right indices");
      int total = 0;
      for (int s : s_list) total += 2 * s + 1;
      for (int t : t_list) total += 2 * t;
      total += core.total();
      if (total != n) throw StructureError("block sizes do not sum to n");
      for (const auto& eb : core.eigenvalues)
        if (std::abs(eb.eigenvalue) < 1e-8)
          throw StructureError("zero eigenvalue leaked into the regular part");

      spec.s_list = std::move(s_list);
      spec.t_list = std::move(t_list);
      spec.core = std::move(core);
      spec.blocks =
          build_blocks(spec.s_list, spec.t_list, spec.core, inv, J.field);
      if (spec.total_size() != n)
        throw StructureError("pairing classes do not cover the regular part");
      return spec;
    } catch (const StructureError& ex) {
      last_err = ex.what();
    }
  }
  throw StructureError("structure detection failed at all tolerances: " +
                       last_err);
}

nlohmann::json kronecker_spec_to_json(const KroneckerSpec& spec) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const KroneckerBlock& b : spec.blocks) {
    nlohmann::json jb;
    jb["kind"] = block_kind_name(b.kind);
    switch (b.kind) {
      case BlockKind::SingularPair:
        jb["s"] = b.param;
        break;
      case BlockKind::ZeroInfPair:
        jb["t"] = b.param;
        break;
      case BlockKind::Jordan:
        jb["lambda"] = {b.lambda.real(), b.lambda.imag()};
        jb["m"] = b.param;
        break;
      case BlockKind::PairedJordan:
        jb["lambda"] = {b.lambda.real(), b.lambda.imag()};
        jb["p"] = b.param;
        jb["copies"] = b.copies;
        break;
    }
    blocks.push_back(std::move(jb));
  }
  return nlohmann::json{{"blocks", std::move(blocks)},
                        {"n", spec.n},
                        {"involution", involution_name(spec.inv)},
                        {"field", field_name(spec.field)}};
}

std::pair<CMat, CMat> s_pencil(int n) {
  if (n < 1 || n % 2 == 0)
    throw std::invalid_argument("s_pencil: size must be odd and positive");
  const int s = (n - 1) / 2;
  CMat S0 = CMat::Zero(n, n), S1 = CMat::Zero(n, n);
  for (int d = 1; d <= s; ++d) {
    S0(d - 1, s + d) = 1.0;  // top-right: ones diagonal,
    S1(d, s + d) = -1.0;     // -lambda subdiagonal
  }
  for (int r = 1; r <= s; ++r) {
    S1(s + r, r - 1) = -1.0;  // bottom-left: -lambda diagonal,
    S0(s + r, r) = 1.0;       // ones superdiagonal
  }
  return {S0, S1};
}

CMat g_mat(int m, Cx alpha) {
  if (m < 0) throw std::invalid_argument("g_mat: negative size");
  CMat G = CMat::Zero(m, m);
  for (int j = 1; j <= m; ++j)
    for (int k = 1; k <= m; ++k) {
      const int e = k + j - m - 1;
      if (e >= 0 && e <= j - 1)
        G(j - 1, k - 1) =
            comb(j - 1, e) * (e > 0 ? std::pow(alpha, e) : Cx(1.0, 0.0));
    }
  return G;
}

EFTable ef_S_self(int n) {
  if (n < 1 || n % 2 == 0)
    throw std::invalid_argument("ef_S_self: size must be odd and positive");
  const int s = (n - 1) / 2;
  EFTable pairs;
  CMat E1 = CMat::Zero(n, n), F1 = CMat::Zero(n, n);
  E1.block(0, 0, s + 1, s + 1) = backwards_identity(s + 1, s + 1, s + 1);
  F1.block(s + 1, s + 1, s, s) = backwards_identity(s, s, s);
  pairs.emplace_back(E1, F1);
  for (int j = 2; j <= n; ++j) {
    CMat E = CMat::Zero(n, n), F = CMat::Zero(n, n);
    E.block(s + 1, 0, s, s + 1) = backwards_identity(j - 1, s, s + 1);
    F.block(0, s + 1, s + 1, s) = backwards_identity(j - 1, s + 1, s);
    pairs.emplace_back(std::move(E), std::move(F));
  }
  pairs.emplace_back(F1, E1);
  return pairs;
}

std::pair<EFTable, EFTable> ef_S_S(int m, int n) {
  if (m <= n || n < 1 || m % 2 == 0 || n % 2 == 0)
    throw std::invalid_argument("ef_S_S: odd sizes with m > n required");
  const int mp = (m - 1) / 2, nq = (n - 1) / 2;
  EFTable first;
  for (int j = 1; j <= (m - n) / 2 + 1; ++j) {
    CMat E = CMat::Zero(m, n), F = CMat::Zero(m, n);
    E.block(0, 0, mp + 1, nq + 1) = backwards_identity(nq + j, mp + 1, nq + 1);
    F.block(mp + 1, nq + 1, mp, nq) = backwards_identity(nq + j - 1, mp, nq);
    first.emplace_back(std::move(E), std::move(F));
  }
  for (int j = (m - n) / 2 + 2; j <= m; ++j) {
    CMat E = CMat::Zero(m, n), F = CMat::Zero(m, n);
    const int k = j - (mp - nq + 1);
    E.block(mp + 1, 0, mp, nq + 1) = backwards_identity(k, mp, nq + 1);
    F.block(0, nq + 1, mp + 1, nq) = backwards_identity(k, mp + 1, nq);
    first.emplace_back(std::move(E), std::move(F));
  }
  EFTable second;
  for (const auto& [E, F] : first)
    second.emplace_back(F.transpose(), E.transpose());
  return {std::move(first), std::move(second)};
}

std::pair<EFTable, EFTable> ef_S_jordan(int n, int m, Cx alpha) {
  if (n < 1 || n % 2 == 0 || m < 1)
    throw std::invalid_argument("ef_S_jordan: odd S size and m >= 1 required");
  const int s = (n - 1) / 2;
  const CMat Gs = g_mat(s, alpha);
  const CMat Gs1 = g_mat(s + 1, alpha);
  EFTable first;
  for (int j = 1; j <= m; ++j) {
    CMat E = CMat::Zero(n, m), F = CMat::Zero(n, m);
    for (int k = 1; k <= s; ++k) {
      const int c = j - k + 1;
      if (c >= 1 && c <= m) E.block(s + 1, c - 1, s, 1) = Gs.col(s - k);
    }
    for (int k = 1; k <= s + 1; ++k) {
      const int c = j - k + 1;
      if (c >= 1 && c <= m) F.block(0, c - 1, s + 1, 1) = Gs1.col(s + 1 - k);
    }
    first.emplace_back(std::move(E), std::move(F));
  }
  EFTable second;
  for (const auto& [E, F] : first)
    second.emplace_back(F.transpose(), E.transpose());
  return {std::move(first), std::move(second)};
}

std::vector<EFPair> ef_block_basis(const KroneckerSpec& spec, int b1, int b2) {
  const int nb = static_cast<int>(spec.blocks.size());
  if (b1 < 0 || b1 >= nb || b2 < 0 || b2 >= nb)
    throw std::invalid_argument("ef_block_basis: block index out of range");
  const KroneckerBlock& K1 = spec.blocks[b1];
  const KroneckerBlock& K2 = spec.blocks[b2];
  auto unsupported = [](const KroneckerBlock& b) {
    return b.kind == BlockKind::ZeroInfPair ||
           b.kind == BlockKind::PairedJordan;
  };
  if (unsupported(K1) || unsupported(K2))
    throw std::domain_error(
        "ef_block_basis: paired/zero-infinity blocks must be decomposed into "
        "their Jordan pieces first");

  std::vector<EFPair> out;
  auto push = [&out](const EFTable& tbl, int a, int b) {
    for (const auto& [E, F] : tbl) out.push_back({E, F, a, b});
  };

  const bool sp1 = K1.kind == BlockKind::SingularPair;
  const bool sp2 = K2.kind == BlockKind::SingularPair;
  if (sp1 && sp2) {
    const int n1 = K1.size(), n2 = K2.size();
    if (b1 == b2) {
      push(ef_S_self(n1), b1, b1);
    } else if (n1 == n2) {
      const EFTable f = ef_S_self(n1);
      EFTable sec;
      for (const auto& [E, F] : f)
        sec.emplace_back(F.transpose(), E.transpose());
      push(f, b1, b2);
      push(sec, b2, b1);
    } else if (n1 < n2) {
      const auto [f, sec] = ef_S_S(n2, n1);
      push(f, b1, b2);
      push(sec, b2, b1);
    } else {
      const auto [f, sec] = ef_S_S(n1, n2);
      push(f, b2, b1);
      push(sec, b1, b2);
    }
    return out;
  }
  if (sp1 != sp2) {
    // The first family solves E (J_m^a - l)^T - S_n(l) F = 0, so its K1
    // slot is the Jordan block.
    const KroneckerBlock& S = sp1 ? K1 : K2;
    const KroneckerBlock& R = sp1 ? K2 : K1;
    const int is = sp1 ? b1 : b2, ir = sp1 ? b2 : b1;
    const auto [f, sec] = ef_S_jordan(S.size(), R.param, R.lambda);
    push(f, ir, is);
    push(sec, is, ir);
    return out;
  }
  // Jordan x Jordan: nonzero only at equal eigenvalues, where the pairs
  // are the antidiagonal embeddings (E_k, E_k).
  if (!eigenstructure::near_eig(K1.lambda, K2.lambda)) return out;
  const int kmax = std::min(K1.param, K2.param);
  for (int k = 1; k <= kmax; ++k) {
    const CMat E = backwards_identity(k, K2.param, K1.param);
    out.push_back({E, E, b1, b2});
  }
  if (b1 != b2)
    for (int k = 1; k <= kmax; ++k) {
      const CMat E = backwards_identity(k, K1.param, K2.param);
      out.push_back({E, E, b2, b1});
    }
  return out;
}

ReducingChains reducing_chains(const Mat& J, const KroneckerSpec& spec,
                               int block, double tol, std::uint64_t seed) {
  if (block < 0 || block >= static_cast<int>(spec.blocks.size()))
    throw std::invalid_argument("reducing_chains: block index out of range");
  const double tolc = tol < 0 ? 1e-9 : tol;
  const CMat& A = J.a;
  const CMat Js = adj(A, spec.inv);
  const KroneckerBlock& b = spec.blocks[block];

  ReducingChains rc;
  rc.block = block;

  if (b.kind == BlockKind::SingularPair) {
    int ord = 0;
    for (int i = 0; i < block; ++i)
      ord += spec.blocks[i].kind == BlockKind::SingularPair ? 1 : 0;
    auto [sblocks, a_chains] = s_block_chains(A, Js, spec.s_list, tolc, seed);
    const SBlock& sb = sblocks.at(ord);
    rc.W = sb.W;
    rc.U = sb.U;
    rc.Q = sb.Q;
    rc.P = sb.P;
    return rc;
  }

  const std::vector<CMat> a_chains =
      spec.s_list.empty()
          ? std::vector<CMat>{}
          : minimal_right_polychains(A, Js, spec.s_list, tolc);

  if (b.kind == BlockKind::ZeroInfPair) {
    int ord = 0;
    for (int i = 0; i < block; ++i)
      ord += spec.blocks[i].kind == BlockKind::ZeroInfPair ? 1 : 0;
    const WUQP c = chains_wuqp(A, Js, spec.inv, Cx(0.0, 0.0), spec.t_list,
                               a_chains, tolc);
    rc.W = c.W.at(ord);
    rc.U = c.U.at(ord);
    rc.Q = c.Q.at(ord);
    rc.P = c.P.at(ord);
    return rc;
  }

  // Jordan kinds: chains at the representative of the block's class.
  const PairClass* cls = nullptr;
  const auto classes =
      eigenstructure::pair_classes(spec.core, spec.inv, spec.field);
  for (const PairClass& c : classes)
    if (eigenstructure::near_eig(c.rep, b.lambda)) {
      cls = &c;
      break;
    }
  if (cls == nullptr)
    throw StructureError(
        "reducing_chains: block eigenvalue missing from the pairing classes");
  int ord = 0;
  for (int i = 0; i < block; ++i) {
    const KroneckerBlock& o = spec.blocks[i];
    if ((o.kind == BlockKind::Jordan || o.kind == BlockKind::PairedJordan) &&
        eigenstructure::near_eig(o.lambda, b.lambda))
      ++ord;
  }
  const WUQP c =
      chains_wuqp(A, Js, spec.inv, cls->rep, cls->sizes, a_chains, tolc);
  rc.lambda = cls->rep;
  rc.W = c.W.at(ord);
  rc.U = c.U.at(ord);
  rc.Q = c.Q.at(ord);
  rc.P = c.P.at(ord);
  return rc;
}

std::vector<CMat> singular_sol_basis(const Mat& J, Involution inv, int sign,
                                     double tol) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("singular_sol_basis: sign must be +1 or -1");
  const double tolc = tol < 0 ? 1e-9 : tol;
  const CMat& A = J.a;
  const int n = static_cast<int>(A.rows());
  if (n == 0) return {};
  const CMat Js = adj(A, inv);
  auto ad = [inv](const CMat& M) { return adj(M, inv); };
  const bool hstar = inv == Involution::H;
  const bool real_route = J.field == Field::Real && inv == Involution::T;
  const double sg = sign;

  const KroneckerSpec spec = kronecker_structure(J, inv);

  std::vector<SBlock> sblocks;
  std::vector<CMat> a_chains;
  if (!spec.s_list.empty())
    std::tie(sblocks, a_chains) = s_block_chains(A, Js, spec.s_list, tolc, 11);

  auto wuqp = [&](Cx lam, const std::vector<int>& sizes) {
    return chains_wuqp(A, Js, inv, lam, sizes, a_chains, tolc);
  };

  std::vector<CMat> elems;

  // ---- regular eigenvalue classes (Z blocks join at lambda = 0) ----
  enum class RegKind { Pm1, Unit, Pair };
  auto add_regular = [&](Cx rep, std::vector<int> sizes, RegKind kind) {
    std::sort(sizes.begin(), sizes.end(), std::greater<int>());
    const WUQP c = wuqp(rep, sizes);
    const int m = static_cast<int>(sizes.size());
    for (int si = 0; si < m; ++si)
      for (int ti = 0; ti < m; ++ti) {
        if ((kind == RegKind::Pm1 || kind == RegKind::Unit) && si > ti)
          continue;
        const CMat &U = c.U[si], &P = c.P[si], &W = c.W[ti], &Q = c.Q[ti];
        const int rs = sizes[si], rt = sizes[ti];
        for (int k = 1; k <= std::min(rs, rt); ++k) {
          const CMat E = backwards_identity(k, rt, rs);
          const CMat Xm = U * ad(E) * ad(Q) - sg * (W * E * ad(P));
          if (kind == RegKind::Pm1 && si == ti) {
            // Diagonal terms at +/-1 survive by index parity only.
            const double pm = std::abs(rep - Cx(1.0, 0.0)) < 1e-6 ? 1.0 : -1.0;
            const bool keep =
                ((pm > 0) == (sign > 0)) ? (k % 2 == 0) : (k % 2 == 1);
            if (keep) elems.push_back(Xm);
          } else if (kind == RegKind::Unit && si == ti) {
            elems.push_back(Xm);
            elems.push_back(Cx(0.0, 1.0) *
                            (U * ad(E) * ad(Q) + sg * (W * E * ad(P))));
          } else {
            elems.push_back(Xm);
            if (hstar)
              elems.push_back(Cx(0.0, 1.0) *
                              (U * ad(E) * ad(Q) + sg * (W * E * ad(P))));
          }
        }
      }
  };

  std::vector<std::pair<Cx, std::vector<int>>> reg_blocks;
  if (!spec.core.eigenvalues.empty()) {
    for (const PairClass& cl :
         eigenstructure::pair_classes(spec.core, inv, J.field)) {
      const Cx rep = cl.rep;
      const bool at_pm1 =
          inv == Involution::T && (std::abs(rep - Cx(1.0, 0.0)) < 1e-6 ||
                                   std::abs(rep + Cx(1.0, 0.0)) < 1e-6);
      if (real_route &&
          std::abs(rep.imag()) > 1e-8 * std::max(1.0, std::abs(rep))) {
        // Nonreal class over the reals: realify below; off the unit
        // circle the reciprocal representative contributes separately.
        const std::vector<Cx> reps =
            std::abs(std::abs(rep) - 1.0) < 1e-6
                ? std::vector<Cx>{rep}
                : std::vector<Cx>{rep, 1.0 / rep};
        for (Cx rp : reps) {
          add_regular(rp, cl.sizes, RegKind::Pair);
          reg_blocks.emplace_back(rp, cl.sizes);
        }
      } else {
        const RegKind kind = at_pm1 ? RegKind::Pm1
                             : (cl.self_paired && hstar) ? RegKind::Unit
                                                         : RegKind::Pair;
        add_regular(rep, cl.sizes, kind);
        reg_blocks.emplace_back(rep, cl.sizes);
      }
    }
  }
  if (!spec.t_list.empty()) {
    add_regular(Cx(0.0, 0.0), spec.t_list, RegKind::Pair);
    reg_blocks.emplace_back(Cx(0.0, 0.0), spec.t_list);
  }

  // ---- single S blocks ----
  for (const SBlock& blk : sblocks) {
    for (const auto& [E, F] : ef_S_self(2 * blk.s + 1)) {
      elems.push_back(blk.U * ad(E) * ad(blk.Q) - sg * (blk.W * F * ad(blk.P)));
      if (hstar)
        elems.push_back(Cx(0.0, 1.0) * (blk.U * ad(E) * ad(blk.Q) +
                                        sg * (blk.W * F * ad(blk.P))));
    }
  }

  // ---- S x S interactions ----
  for (std::size_t i = 0; i < sblocks.size(); ++i)
    for (std::size_t j = i + 1; j < sblocks.size(); ++j) {
      const SBlock* b1 = &sblocks[i];
      const SBlock* b2 = &sblocks[j];
      if (b1->s > b2->s) std::swap(b1, b2);
      const int nsm = 2 * b1->s + 1, nbg = 2 * b2->s + 1;
      EFTable first, second;
      if (nsm == nbg) {
        first = ef_S_self(nsm);
        for (const auto& [E, F] : first)
          second.emplace_back(F.transpose(), E.transpose());
      } else {
        std::tie(first, second) = ef_S_S(nbg, nsm);
      }
      for (const auto& [E, F] : first) {
        elems.push_back(b1->U * ad(E) * ad(b2->Q) -
                        sg * (b2->W * F * ad(b1->P)));
        if (hstar)
          elems.push_back(Cx(0.0, 1.0) * (b1->U * ad(E) * ad(b2->Q) +
                                          sg * (b2->W * F * ad(b1->P))));
      }
      for (const auto& [E, F] : second) {
        elems.push_back(b2->U * ad(E) * ad(b1->Q) -
                        sg * (b1->W * F * ad(b2->P)));
        if (hstar)
          elems.push_back(Cx(0.0, 1.0) * (b2->U * ad(E) * ad(b1->Q) +
                                          sg * (b1->W * F * ad(b2->P))));
      }
    }

  // ---- S x regular interactions ----
  for (const SBlock& blk : sblocks) {
    const int nS = 2 * blk.s + 1;
    for (const auto& [rep, rsz0] : reg_blocks) {
      std::vector<int> rsz = rsz0;
      std::sort(rsz.begin(), rsz.end(), std::greater<int>());
      const WUQP c = wuqp(rep, rsz);
      for (std::size_t bi = 0; bi < rsz.size(); ++bi) {
        const auto [first, second] = ef_S_jordan(nS, rsz[bi], rep);
        for (const auto& [E, F] : first) {
          elems.push_back(c.U[bi] * ad(E) * ad(blk.Q) -
                          sg * (blk.W * F * ad(c.P[bi])));
          if (hstar)
            elems.push_back(Cx(0.0, 1.0) * (c.U[bi] * ad(E) * ad(blk.Q) +
                                            sg * (blk.W * F * ad(c.P[bi]))));
        }
        for (const auto& [E, F] : second) {
          elems.push_back(blk.U * ad(E) * ad(c.Q[bi]) -
                          sg * (c.W[bi] * F * ad(blk.P)));
          if (hstar)
            elems.push_back(Cx(0.0, 1.0) * (blk.U * ad(E) * ad(c.Q[bi]) +
                                            sg * (c.W[bi] * F * ad(blk.P))));
        }
      }
    }
  }

  using core_linalg::SpanMode;
  const SpanMode mode = real_route ? SpanMode::SplitRealImag
                        : hstar    ? SpanMode::RealGram
                                   : SpanMode::Complex;
  return core_linalg::rank_reduce(elems, mode, 1e-8);
}

}  // namespace autgrp::pencil_kronecker
