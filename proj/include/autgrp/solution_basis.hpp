#pragma once

// Bases of sol(J) = {X : X*J + JX = 0} and cosol(J) = {X : X*J - JX = 0}
// for real or complex square J under the transpose or conjugate-transpose
// involution. Nonsingular J goes through the cosquare eigenstructure and
// the pair builder matrices; singular J is routed to the Kronecker-pencil
// machinery. Also here: closed-form dimension counts evaluated from a
// detected structure, the brute-force vec-operator oracle, and span
// comparison between bases.

#include "autgrp/core_linalg.hpp"
#include "autgrp/eigenstructure.hpp"
#include "autgrp/pencil_kronecker.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace autgrp::solution_basis {

using core_linalg::CMat;
using core_linalg::Cx;
using core_linalg::Field;
using core_linalg::Involution;
using core_linalg::Mat;
using pencil_kronecker::KroneckerSpec;

// ---------------------------------------------------------------------
// Pair builder matrices.
//
//   X_T = W E_k^{a,b} U^T J^T - U E_k^{b,a} W^T J     (Y_T with +)
//   X_H = W E_k^{a,b} U^H J^H - U E_k^{b,a} W^H J     (Y_H with +)
//   X_R = W (E_2 (x) E_k^{a,b}) U^T J^T - U (E_2 (x) E_k^{b,a}) W^T J
//
// where E_2 = [[0,1],[1,0]] and the realified kinds read a, b as the
// half-widths of W, U (their columns are [Re | Im] chain stacks).
enum class PairKind { X_T, Y_T, X_H, Y_H, X_R, Y_R };

std::string pair_kind_name(PairKind k);

// Evaluate one builder. Throws std::domain_error on shape mismatch, odd
// widths for the realified kinds, or k outside 1..min(a, b).
CMat build_pair_matrix(PairKind kind, int k, const CMat& J, const CMat& W,
                       const CMat& U);

// ---------------------------------------------------------------------
// Centralizer projection: Z + sign * J^{-1} Z* J, halved on request so
// that the two halves sum back to Z. Note the sign here is the literal
// sign in the formula: sign = -1 lands in sol(J) (whose defining
// equation carries a +), sign = +1 lands in cosol(J). For Z already in
// the target space the unhalved map returns 2 Z.
// Requires Z to commute with the cosquare for the output to be exact.
// Throws SingularInput when J is not invertible.
CMat project_centralizer(const CMat& Z, const CMat& J, Involution inv,
                         int sign, bool halved = false);

// ---------------------------------------------------------------------
// Solution bases.

struct BasisOptions {
  // Independence threshold of the final pruning pass on the nonsingular
  // route; < 0 uses the default 1e-8. The singular route manages its own
  // tolerances.
  double tol = -1.0;
  // Forwarded to the chain engine: nonzero remixes chain tops inside
  // each eigenvalue level (the resulting span must not change).
  std::uint64_t mix_seed = 0;
  // Build from the partner eigenvalue of each pairing class instead of
  // the canonical representative (again span-preserving).
  bool alt_representative = false;
};

// Where one basis element came from: the builder ("X_T", "iY_H", ...;
// "pencil" for elements assembled whole by the singular route, "oracle"
// for nullspace columns), the eigenvalue-class representative, the
// block pair (s, t) inside the class and the antidiagonal index k.
struct SourceTag {
  std::string builder;
  Cx class_rep{0.0, 0.0};
  int s = -1;
  int t = -1;
  int k = 0;
};

struct SolutionBasis {
  int sign = +1;  // +1: sol, -1: cosol
  Involution inv = Involution::T;
  Field field = Field::Complex;  // field the elements are serialized in
  bool real_space = false;       // true: elements span a real vector space
  std::vector<CMat> elements;    // unit Frobenius norm, sign-normalized
  std::vector<SourceTag> sources;   // parallel to elements
  std::vector<double> residuals;    // ||X*J + sign J X||_F per element

  int dim() const { return static_cast<int>(elements.size()); }
  // Dimension over the reals: a complex-T basis spans a complex vector
  // space, everything else is already a real basis.
  int real_dim() const { return real_space ? dim() : 2 * dim(); }
};

// Basis of {X : X*J + sign J X = 0}. Nonsingular J: cosquare chains and
// the pair builders with the per-class selection rules; singular J
// (sigma_min <= 1e-10 sigma_max): Kronecker-pencil assembly. Throws
// std::invalid_argument for bad sign, StructureError when no tolerance
// rung yields a consistent structure.
SolutionBasis basis_of(const Mat& J, Involution inv, int sign,
                       const BasisOptions& opts = {});

SolutionBasis sol_basis(const Mat& J, Involution inv,
                        const BasisOptions& opts = {});
SolutionBasis cosol_basis(const Mat& J, Involution inv,
                          const BasisOptions& opts = {});

// Orthonormal nullspace of the brute-force vec operator, reshaped to
// matrices. Independent verification channel for the assembled bases.
SolutionBasis oracle_basis(const Mat& J, Involution inv, int sign);

// True iff the two bases have equal counts and all principal angles
// between their coordinate spans are below tol. H-involution bases are
// compared in realified coordinates (they span real vector spaces),
// everything else in complex ones. Mismatched ambient sizes compare
// unequal.
bool span_equal(const SolutionBasis& A, const SolutionBasis& B,
                double tol = 1e-8);

// ---------------------------------------------------------------------
// Closed-form dimension counts.

struct DimReport {
  // Contributions: singular blocks (D_L), zero/infinity pairs (D_Z),
  // eigenvalues +1 / -1, unit-modulus classes (D_alpha), reciprocal
  // pairs (D_P) and the singular-regular interaction (D_I). Terms that
  // do not apply to a route stay 0.
  int D_L = 0, D_Z = 0, D_1 = 0, D_m1 = 0, D_alpha = 0, D_P = 0, D_I = 0;
  int total = 0;  // sum of the terms above
  // The interaction term has a second printed form on the real route;
  // both are reported and the mismatch flagged instead of hidden.
  int D_I_alt = 0;
  bool variant_mismatch = false;
  // Brute-force nullity when a matrix was supplied and small enough,
  // else -1; `agrees` is total == oracle_nullity whenever evaluated.
  int oracle_nullity = -1;
  bool agrees = true;
};

// Evaluate the dimension formulas for the route implied by
// (spec.field, spec.inv). sign +1 counts sol, -1 counts cosol. The
// complex-T route counts complex dimensions, the other routes real ones.
DimReport dim_from_structure(const KroneckerSpec& spec, int sign);

// Same, additionally computing the vec-operator nullity of J (n <= 12)
// and setting the agreement flag.
DimReport dim_from_structure(const KroneckerSpec& spec, int sign,
                             const Mat& J);

nlohmann::json dim_report_to_json(const DimReport& r);

// {"space","involution","field","dim","real_dim","elements",
//  "residual_max","sources"} plus "dim_report" when one is supplied.
nlohmann::json solution_basis_to_json(const SolutionBasis& b,
                                      const DimReport* report = nullptr);

}  // namespace autgrp::solution_basis
