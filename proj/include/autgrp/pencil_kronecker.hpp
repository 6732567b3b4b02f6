#pragma once

// Kronecker structure of the palindromic pencil J - lambda J*, the
// reducing-chain matrices (W, U, Q, P) attached to its blocks, the
// canonical (E, F) pair tables, and the solution-space bases they
// assemble for singular J. J* is J^T or J^H per the involution.

#include "autgrp/core_linalg.hpp"
#include "autgrp/eigenstructure.hpp"

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

namespace autgrp::pencil_kronecker {

using core_linalg::CMat;
using core_linalg::Cx;
using core_linalg::Field;
using core_linalg::Involution;
using core_linalg::Mat;

enum class BlockKind {
  SingularPair,  // L_s (+) L_s^T, realized as the odd pencil S_{2s+1}
  ZeroInfPair,   // Z_t: nilpotent Jordan pair at 0 and infinity, size 2t
  Jordan,        // self-paired regular eigenvalue, one J_m block
  PairedJordan   // regular eigenvalue class of 2 (or 4) partner copies
};

// JSON kind tag: "L", "Z", "Jordan" or "PairedJordan".
const char* block_kind_name(BlockKind kind);

struct KroneckerBlock {
  BlockKind kind = BlockKind::Jordan;
  int param = 0;        // s | t | m | p, per kind
  Cx lambda{0.0, 0.0};  // representative eigenvalue (Jordan kinds only)
  int copies = 1;       // eigenvalue-class members folded into the block
  int size() const;     // 2s+1 | 2t | m | copies * p
};

struct KroneckerSpec {
  std::vector<KroneckerBlock> blocks;
  Involution inv = Involution::T;
  Field field = Field::Complex;
  int n = 0;

  // Raw staircase output backing `blocks`; the chain and basis routines
  // work from these.
  std::vector<int> s_list;          // ascending
  std::vector<int> t_list;          // descending
  eigenstructure::JordanSpec core;  // regular part (spectrum of J*^{-1}J)

  int total_size() const;
};

// Staircase extraction of the full Kronecker structure. tol >= 0 fixes
// the rank cutoff (relative to ||J||); tol < 0 walks a ladder and
// accepts the first cutoff whose mirror/accounting checks all pass.
KroneckerSpec kronecker_structure(const Mat& J, Involution inv,
                                  double tol = -1.0);

nlohmann::json kronecker_spec_to_json(const KroneckerSpec& spec);

// Chain matrices of one block: (J - lambda J*) W = Q K(lambda) and
// (J* - lambda J) U = P K(lambda_u), coefficient-wise in lambda, where
// K is the block's pencil (S_{2s+1}, or J_r^lambda - lambda I) and
// lambda_u = conj(lambda) for H, lambda otherwise. For Jordan kinds the
// chains are taken at the representative; Q = J* W and P = J U.
struct ReducingChains {
  int block = -1;  // index into spec.blocks
  Cx lambda{0.0, 0.0};
  CMat W, U, Q, P;  // n x size each (n x param for Jordan kinds)
};

ReducingChains reducing_chains(const Mat& J, const KroneckerSpec& spec,
                               int block, double tol = -1.0,
                               std::uint64_t seed = 11);

// One canonical pair: E K1(lambda)^T - K2(lambda) F = 0 identically in
// lambda, where K1/K2 are the pencils of blocks `block1`/`block2`.
struct EFPair {
  CMat E, F;
  int block1 = -1;
  int block2 = -1;
};

// S_n = S0 + lambda S1, the odd singular-pair pencil (n = 2s+1).
std::pair<CMat, CMat> s_pencil(int n);

// [G]_{jk} = C(j-1, k+j-m-1) alpha^{k+j-m-1}, the triangular coupling
// matrix of the S x Jordan table.
CMat g_mat(int m, Cx alpha);

using EFTable = std::vector<std::pair<CMat, CMat>>;

// Pair table for a single S_n block (n odd): n+1 pairs.
EFTable ef_S_self(int n);

// Pair tables for two S blocks of odd sizes m > n: m pairs solving
// E S_n(l)^T - S_m(l) F = 0 and the m transposed pairs for the other
// orientation.
std::pair<EFTable, EFTable> ef_S_S(int m, int n);

// Pair tables for S_n against a Jordan block J_m^alpha: m pairs solving
// E (J_m^alpha - l)^T - S_n(l) F = 0 plus the m transposed ones.
std::pair<EFTable, EFTable> ef_S_jordan(int n, int m, Cx alpha);

// All (E, F) pairs coupling blocks b1 and b2 of the spec, each tagged
// with its orientation. Jordan x Jordan with distinct eigenvalues is
// provably empty; paired/zero-infinity kinds must be decomposed by the
// caller and are rejected with a domain error.
std::vector<EFPair> ef_block_basis(const KroneckerSpec& spec, int b1, int b2);

// Basis of {X : X*J + sign*JX = 0} through the Kronecker structure;
// works for any square J but exists for the singular ones the cosquare
// route rejects. Field `real` + T yields real matrices spanning the
// real solution space; H yields a basis over the reals. tol < 0 uses
// the default chain tolerance.
std::vector<CMat> singular_sol_basis(const Mat& J, Involution inv, int sign,
                                     double tol = -1.0);

}  // namespace autgrp::pencil_kronecker
