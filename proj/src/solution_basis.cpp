#include "autgrp/solution_basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace autgrp::solution_basis {

using core_linalg::adj;
using core_linalg::CVec;
using core_linalg::RVec;
using core_linalg::SpanMode;
using core_linalg::StructureError;
using eigenstructure::ChainOptions;
using eigenstructure::ChainSet;
using eigenstructure::JordanSpec;

namespace {

// Closeness scale shared with the eigenvalue clustering: decisions like
// "is this class sitting at +1" must use the same radius the structure
// detection used, or the two disagree on borderline classes.
constexpr double kClassTol = 1e-6;

bool near_val(Cx x, Cx y) {
  return std::abs(x - y) <= kClassTol * std::max({1.0, std::abs(x), std::abs(y)});
}

bool at_plus1(Cx l) { return std::abs(l - 1.0) < kClassTol; }
bool at_minus1(Cx l) { return std::abs(l + 1.0) < kClassTol; }
bool unit_modulus(Cx l) { return std::abs(std::abs(l) - 1.0) < kClassTol; }

// Diagonal pairs at +-1 keep only every other antidiagonal index; the
// other half collapses to (anti)symmetry. sol at +1 and cosol at -1
// keep the even k, the complementary cases keep the odd k.
bool parity_keep(bool plus, int sign, int k) {
  const bool keep_even = (sign > 0) == plus;
  return keep_even ? (k % 2 == 0) : (k % 2 == 1);
}

// [[0,1],[1,0]] (x) E without reaching for a Kronecker routine.
CMat kron_swap2(const CMat& E) {
  CMat K = CMat::Zero(2 * E.rows(), 2 * E.cols());
  K.topRightCorner(E.rows(), E.cols()) = E;
  K.bottomLeftCorner(E.rows(), E.cols()) = E;
  return K;
}

}  // namespace

std::string pair_kind_name(PairKind k) {
  switch (k) {
    case PairKind::X_T: return "X_T";
    case PairKind::Y_T: return "Y_T";
    case PairKind::X_H: return "X_H";
    case PairKind::Y_H: return "Y_H";
    case PairKind::X_R: return "X_R";
    case PairKind::Y_R: return "Y_R";
  }
  return "?";
}

CMat build_pair_matrix(PairKind kind, int k, const CMat& J, const CMat& W,
                       const CMat& U) {
  const bool realified = kind == PairKind::X_R || kind == PairKind::Y_R;
  const bool conj = kind == PairKind::X_H || kind == PairKind::Y_H;
  const double second =
      (kind == PairKind::X_T || kind == PairKind::X_H || kind == PairKind::X_R)
          ? -1.0
          : 1.0;

  if (J.rows() != J.cols() || W.rows() != J.rows() || U.rows() != J.rows())
    throw std::domain_error("build_pair_matrix: chain heights do not match J");
  int a = static_cast<int>(W.cols());
  int b = static_cast<int>(U.cols());
  if (realified) {
    if (a % 2 != 0 || b % 2 != 0)
      throw std::domain_error(
          "build_pair_matrix: realified kinds need even-width chains");
    a /= 2;
    b /= 2;
  }
  if (k < 1 || k > std::min(a, b))
    throw std::domain_error("build_pair_matrix: antidiagonal index out of range");

  CMat Eab = core_linalg::backwards_identity(k, a, b);
  CMat Eba = core_linalg::backwards_identity(k, b, a);
  if (realified) {
    Eab = kron_swap2(Eab);
    Eba = kron_swap2(Eba);
  }
  const Involution star = conj ? Involution::H : Involution::T;
  return W * Eab * adj(U, star) * adj(J, star) +
         second * (U * Eba * adj(W, star) * J);
}

CMat project_centralizer(const CMat& Z, const CMat& J, Involution inv,
                         int sign, bool halved) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("project_centralizer: sign must be +1 or -1");
  if (Z.rows() != Z.cols() || J.rows() != J.cols() || Z.rows() != J.rows())
    throw std::domain_error("project_centralizer: shapes do not match");
  if (J.rows() == 0) return CMat(0, 0);
  const RVec sv = core_linalg::svdvals(J);
  if (sv(sv.size() - 1) <= 1e-10 * sv(0))
    throw core_linalg::SingularInput(
        "project_centralizer: J is singular to working precision");
  const CMat T = J.partialPivLu().solve(adj(Z, inv) * J);
  CMat out = Z + static_cast<double>(sign) * T;
  if (halved) out *= 0.5;
  return out;
}

namespace {

struct RawElement {
  CMat mat;
  SourceTag tag;
};

void emit(std::vector<RawElement>& raw, CMat el, std::string builder, Cx rep,
          int s, int t, int k) {
  raw.push_back({std::move(el), {std::move(builder), rep, s, t, k}});
}

// Per-class generators for the nonsingular routes. The selection rules
// mirror the spanning-set theorems: representatives only, the (t, s)
// half dropped where it repeats the (s, t) half, parity at +-1, i-partners
// on the conjugate-transpose route, and both reciprocal representatives
// for realified classes off the unit circle. The final rank reduction
// still guards independence regardless.
std::vector<RawElement> assemble_nonsingular(const Mat& J, Involution inv,
                                             int sign,
                                             const BasisOptions& opts) {
  const CMat C = eigenstructure::cosquare(J.a, inv);
  const JordanSpec spec = eigenstructure::jordan_structure(C);
  ChainOptions co;
  co.mix_seed = opts.mix_seed;
  co.alt_representative = opts.alt_representative;
  const auto sets = eigenstructure::jordan_chains(C, spec, inv, J.field, co);

  std::vector<RawElement> raw;
  for (const ChainSet& cs : sets) {
    const int m = static_cast<int>(cs.sizes.size());

    if (inv == Involution::H) {
      const bool unit = unit_modulus(cs.rep);
      for (int si = 0; si < m; ++si)
        for (int ti = 0; ti < m; ++ti) {
          if (unit && si > ti) continue;
          for (int k = 1; k <= std::min(cs.sizes[si], cs.sizes[ti]); ++k) {
            const CMat x =
                build_pair_matrix(PairKind::X_H, k, J.a, cs.W[si], cs.U[ti]);
            const CMat y =
                build_pair_matrix(PairKind::Y_H, k, J.a, cs.W[si], cs.U[ti]);
            if (sign > 0) {
              emit(raw, x, "X_H", cs.rep, si, ti, k);
              emit(raw, Cx(0, 1) * y, "iY_H", cs.rep, si, ti, k);
            } else {
              emit(raw, y, "Y_H", cs.rep, si, ti, k);
              emit(raw, Cx(0, 1) * x, "iX_H", cs.rep, si, ti, k);
            }
          }
        }
      continue;
    }

    if (cs.realified) {
      // Nonreal class of a real problem: realified chains, and off the
      // unit circle the reciprocal representative contributes its own set.
      const PairKind kind = sign > 0 ? PairKind::X_R : PairKind::Y_R;
      struct RepSet {
        Cx rep;
        const std::vector<CMat>*W, *U;
      };
      std::vector<RepSet> reps = {{cs.rep, &cs.W, &cs.U}};
      if (!cs.W2.empty()) reps.push_back({cs.rep2, &cs.W2, &cs.U2});
      for (const RepSet& r : reps)
        for (int si = 0; si < m; ++si)
          for (int ti = 0; ti < m; ++ti)
            for (int k = 1; k <= std::min(cs.sizes[si], cs.sizes[ti]); ++k)
              emit(raw,
                   build_pair_matrix(kind, k, J.a, (*r.W)[si], (*r.U)[ti]),
                   pair_kind_name(kind), r.rep, si, ti, k);
      continue;
    }

    // Transpose route, one representative: complex class or real
    // eigenvalue of a real problem.
    const bool plus = at_plus1(cs.rep);
    const bool pm1 = plus || at_minus1(cs.rep);
    const PairKind kind = sign > 0 ? PairKind::X_T : PairKind::Y_T;
    for (int si = 0; si < m; ++si)
      for (int ti = 0; ti < m; ++ti) {
        if (pm1 && si > ti) continue;
        for (int k = 1; k <= std::min(cs.sizes[si], cs.sizes[ti]); ++k) {
          if (pm1 && si == ti && !parity_keep(plus, sign, k)) continue;
          emit(raw, build_pair_matrix(kind, k, J.a, cs.W[si], cs.U[ti]),
               pair_kind_name(kind), cs.rep, si, ti, k);
        }
      }
  }
  return raw;
}

void normalize_element(CMat& X) {
  const double nf = X.norm();
  if (nf > 0.0) X /= nf;
  const CVec v = core_linalg::vec(X);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Cx c = v(i);
    if (std::abs(c) <= 1e-12) continue;
    const bool flip = c.real() < -1e-12 ||
                      (std::abs(c.real()) <= 1e-12 && c.imag() < 0.0);
    if (flip) X = -X;
    break;
  }
}

void finalize(SolutionBasis& out, const CMat& J) {
  if (out.field == Field::Real) {
    for (CMat& X : out.elements) {
      const double imax =
          X.size() ? X.imag().cwiseAbs().maxCoeff() : 0.0;
      if (imax > 1e-8)
        throw StructureError(
            "solution basis: expected a real element on the real route");
      CMat re = X.real().cast<Cx>();
      X = std::move(re);
    }
  }
  for (CMat& X : out.elements) normalize_element(X);
  out.residuals.clear();
  for (const CMat& X : out.elements)
    out.residuals.push_back(
        (adj(X, out.inv) * J + static_cast<double>(out.sign) * (J * X)).norm());
}

}  // namespace

SolutionBasis basis_of(const Mat& J, Involution inv, int sign,
                       const BasisOptions& opts) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("basis_of: sign must be +1 or -1");
  if (J.rows() != J.cols())
    throw std::invalid_argument("basis_of: J must be square");

  SolutionBasis out;
  out.sign = sign;
  out.inv = inv;
  out.field = (inv == Involution::T && J.field == Field::Real)
                  ? Field::Real
                  : Field::Complex;
  out.real_space = inv == Involution::H || out.field == Field::Real;
  if (J.rows() == 0) return out;

  const RVec sv = core_linalg::svdvals(J.a);
  if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    out.elements = pencil_kronecker::singular_sol_basis(J, inv, sign);
    out.sources.assign(out.elements.size(), SourceTag{"pencil", 0.0, -1, -1, 0});
  } else {
    std::vector<RawElement> raw = assemble_nonsingular(J, inv, sign, opts);
    std::vector<CMat> cand;
    cand.reserve(raw.size());
    for (const RawElement& r : raw) cand.push_back(r.mat);
    const SpanMode mode =
        inv == Involution::H ? SpanMode::RealGram : SpanMode::Complex;
    std::vector<int> kept_from;
    out.elements = core_linalg::rank_reduce(
        cand, mode, opts.tol < 0 ? 1e-8 : opts.tol, &kept_from);
    for (int idx : kept_from) out.sources.push_back(raw[idx].tag);
  }
  finalize(out, J.a);
  return out;
}

SolutionBasis sol_basis(const Mat& J, Involution inv,
                        const BasisOptions& opts) {
  return basis_of(J, inv, +1, opts);
}

SolutionBasis cosol_basis(const Mat& J, Involution inv,
                          const BasisOptions& opts) {
  return basis_of(J, inv, -1, opts);
}

SolutionBasis oracle_basis(const Mat& J, Involution inv, int sign) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("oracle_basis: sign must be +1 or -1");
  if (J.rows() != J.cols())
    throw std::invalid_argument("oracle_basis: J must be square");

  SolutionBasis out;
  out.sign = sign;
  out.inv = inv;
  out.field = Field::Complex;  // nullspace columns mix phases freely
  out.real_space = inv == Involution::H;
  const int n = J.rows();
  if (n == 0) return out;

  if (inv == Involution::T) {
    const CMat N = core_linalg::nullspace(core_linalg::t_operator(J.a, sign),
                                          1e-10);
    for (Eigen::Index c = 0; c < N.cols(); ++c)
      out.elements.push_back(core_linalg::unvec(N.col(c), n, n));
  } else {
    const CMat N = core_linalg::nullspace(
        core_linalg::h_operator(J.a, sign).cast<Cx>(), 1e-10);
    for (Eigen::Index c = 0; c < N.cols(); ++c) {
      const CVec col = N.col(c);
      out.elements.push_back(core_linalg::unvec(col.head(n * n), n, n) +
                             Cx(0, 1) *
                                 core_linalg::unvec(col.tail(n * n), n, n));
    }
  }
  out.sources.assign(out.elements.size(), SourceTag{"oracle", 0.0, -1, -1, 0});
  finalize(out, J.a);
  return out;
}

bool span_equal(const SolutionBasis& A, const SolutionBasis& B, double tol) {
  if (A.dim() != B.dim()) return false;
  if (A.dim() == 0) return true;
  if (A.elements[0].rows() != B.elements[0].rows()) return false;

  // H bases span real vector spaces: compare in realified coordinates
  // (where X and iX are independent); everything else over the complexes.
  const bool realgram =
      A.inv == Involution::H || B.inv == Involution::H;
  auto coords = [realgram](const SolutionBasis& b) {
    const Eigen::Index sz = b.elements[0].size();
    CMat M(realgram ? 2 * sz : sz, b.dim());
    for (int c = 0; c < b.dim(); ++c) {
      const CVec v = core_linalg::vec(b.elements[c]);
      if (realgram) {
        M.col(c).head(sz) = v.real().cast<Cx>();
        M.col(c).tail(sz) = v.imag().cast<Cx>();
      } else {
        M.col(c) = v;
      }
    }
    return M;
  };
  const CMat Qa = core_linalg::orth(coords(A));
  const CMat Qb = core_linalg::orth(coords(B));
  if (Qa.cols() != Qb.cols()) return false;
  return core_linalg::min_subspace_cosine(Qa, Qb) > 1.0 - tol;
}

namespace {

// Eigenvalue-class tags for the dimension formulas. 'p'/'m' are the +-1
// classes, 'a' the remaining unit-modulus (and, on the real route, real)
// classes, 'r' the generic reciprocal pairs.
struct ClassCount {
  char tag;
  std::vector<int> sizes;
};

std::vector<ClassCount> class_counts(const JordanSpec& core, Involution inv,
                                     Field field) {
  std::vector<ClassCount> out;
  for (const auto& cl : eigenstructure::pair_classes(core, inv, field)) {
    const Cx l = cl.rep;
    const bool realish = std::abs(l.imag()) < kClassTol;
    char tag = 'r';
    if (inv == Involution::H) {
      tag = unit_modulus(l) ? 'a' : 'r';
    } else if (realish && near_val(l, 1.0)) {
      tag = 'p';
    } else if (realish && near_val(l, -1.0)) {
      tag = 'm';
    } else if (field == Field::Real && (realish || unit_modulus(l))) {
      tag = 'a';
    }
    out.push_back({tag, cl.sizes});
  }
  return out;
}

template <typename Diag>
int diag_cross(const std::vector<int>& blocks, Diag diag, int crossw) {
  int d = 0;
  for (int m : blocks) d += diag(m);
  for (std::size_t j = 0; j < blocks.size(); ++j)
    for (std::size_t k = j + 1; k < blocks.size(); ++k)
      d += std::min(crossw * blocks[j], crossw * blocks[k]);
  return d;
}

}  // namespace

DimReport dim_from_structure(const KroneckerSpec& spec, int sign) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("dim_from_structure: sign must be +1 or -1");

  const std::vector<int>& s = spec.s_list;
  const std::vector<int>& t = spec.t_list;
  const int a = static_cast<int>(s.size());
  const int n = spec.n;
  const bool h_route = spec.inv == Involution::H;
  const bool real_route =
      spec.inv == Involution::T && spec.field == Field::Real;

  DimReport r;

  int eq_pairs = 0, max_pairs = 0;
  for (int j = 0; j < a; ++j)
    for (int k = j + 1; k < a; ++k) {
      max_pairs += std::max(2 * s[j] + 1, 2 * s[k] + 1);
      if (s[j] == s[k]) ++eq_pairs;
    }

  if (h_route) {
    for (int x : s) r.D_L += 2 * x + 2;
    r.D_L += 2 * max_pairs + 2 * eq_pairs;
    r.D_Z = diag_cross(t, [](int m) { return 2 * m; }, 4);
    for (const auto& cc : class_counts(spec.core, spec.inv, spec.field)) {
      if (cc.tag == 'a')
        r.D_alpha += diag_cross(cc.sizes, [](int m) { return m; }, 2);
      else
        r.D_P += diag_cross(cc.sizes, [](int m) { return 2 * m; }, 4);
    }
    int cols = 0;
    for (int x : s) cols += 4 * x + 2;
    r.D_I = a * (2 * n - cols);
    r.D_I_alt = r.D_I;
  } else {
    for (int x : s) r.D_L += x + 1;
    r.D_L += max_pairs + eq_pairs;
    r.D_Z = diag_cross(t, [](int m) { return m; }, 2);
    for (const auto& cc : class_counts(spec.core, spec.inv, spec.field)) {
      // Halves of the +-1 diagonals: sol keeps floor at +1 and ceil at
      // -1; cosol the complements.
      const auto low = [](int m) { return m / 2; };
      const auto high = [](int m) { return (m + 1) / 2; };
      switch (cc.tag) {
        case 'p':
          r.D_1 += sign > 0 ? diag_cross(cc.sizes, low, 1)
                            : diag_cross(cc.sizes, high, 1);
          break;
        case 'm':
          r.D_m1 += sign > 0 ? diag_cross(cc.sizes, high, 1)
                             : diag_cross(cc.sizes, low, 1);
          break;
        case 'a':
          r.D_alpha += diag_cross(cc.sizes, [](int m) { return m; }, 2);
          break;
        default:
          r.D_P += real_route
                       ? diag_cross(cc.sizes, [](int m) { return 2 * m; }, 4)
                       : diag_cross(cc.sizes, [](int m) { return m; }, 2);
      }
    }
    int cols = 0;
    for (int x : s) cols += 2 * x + 1;
    r.D_I = a * (n - cols);
    int cols_alt = 0;
    for (int x : s) cols_alt += x;
    r.D_I_alt = real_route ? a * (n - cols_alt) : r.D_I;
  }

  r.variant_mismatch = r.D_I_alt != r.D_I;
  r.total = r.D_L + r.D_Z + r.D_1 + r.D_m1 + r.D_alpha + r.D_P + r.D_I;
  return r;
}

DimReport dim_from_structure(const KroneckerSpec& spec, int sign,
                             const Mat& J) {
  DimReport r = dim_from_structure(spec, sign);
  if (J.rows() != J.cols() || J.rows() != spec.n)
    throw std::invalid_argument("dim_from_structure: J does not match spec");
  if (J.rows() <= 12) {
    if (spec.inv == Involution::T)
      r.oracle_nullity = static_cast<int>(
          core_linalg::nullspace(core_linalg::t_operator(J.a, sign), 1e-10)
              .cols());
    else
      r.oracle_nullity = static_cast<int>(
          core_linalg::nullspace(
              core_linalg::h_operator(J.a, sign).cast<Cx>(), 1e-10)
              .cols());
    r.agrees = r.total == r.oracle_nullity;
  }
  return r;
}

nlohmann::json dim_report_to_json(const DimReport& r) {
  return nlohmann::json{
      {"D_L", r.D_L},           {"D_Z", r.D_Z},
      {"D_1", r.D_1},           {"D_-1", r.D_m1},
      {"D_alpha", r.D_alpha},   {"D_P", r.D_P},
      {"D_I", r.D_I},           {"D_I_alt", r.D_I_alt},
      {"variant_mismatch", r.variant_mismatch},
      {"total", r.total},       {"oracle_nullity", r.oracle_nullity},
      {"agrees", r.agrees}};
}

nlohmann::json solution_basis_to_json(const SolutionBasis& b,
                                      const DimReport* report) {
  nlohmann::json els = nlohmann::json::array();
  for (const CMat& X : b.elements) {
    Mat m;
    m.a = X;
    m.field = b.field;
    els.push_back(core_linalg::mat_to_json(m));
  }
  nlohmann::json srcs = nlohmann::json::array();
  for (const SourceTag& t : b.sources)
    srcs.push_back({{"builder", t.builder},
                    {"class", {t.class_rep.real(), t.class_rep.imag()}},
                    {"s", t.s},
                    {"t", t.t},
                    {"k", t.k}});
  double rmax = 0.0;
  for (double r : b.residuals) rmax = std::max(rmax, r);

  nlohmann::json j{{"space", b.sign > 0 ? "sol" : "cosol"},
                   {"involution", core_linalg::involution_name(b.inv)},
                   {"field", core_linalg::field_name(b.field)},
                   {"dim", b.dim()},
                   {"real_dim", b.real_dim()},
                   {"elements", els},
                   {"residual_max", rmax},
                   {"sources", srcs}};
  if (report) j["dim_report"] = dim_report_to_json(*report);
  return j;
}

}  // namespace autgrp::solution_basis
