#pragma once

// Eigenstructure of the cosquare J^{-*}J for nonsingular J: Jordan block
// detection by staircase rank sequences, Jordan chain matrices, the
// lambda <-> 1/lambda (resp. 1/conj(lambda)) pairing classes, and the
// centralizer basis they generate.

#include "autgrp/core_linalg.hpp"

#include <cstdint>
#include <vector>

namespace autgrp::eigenstructure {

using core_linalg::CMat;
using core_linalg::CVec;
using core_linalg::Cx;
using core_linalg::Field;
using core_linalg::Involution;

// J^{-T}J or J^{-H}J. rtol < 0 uses the default pre-check threshold
// n * eps; throws SingularInput when sigma_min <= rtol * sigma_max.
CMat cosquare(const CMat& J, Involution inv, double rtol = -1.0);

// Jordan block sizes per (clustered) eigenvalue, sizes descending.
struct EigBlocks {
  Cx eigenvalue;
  std::vector<int> sizes;
};

struct JordanSpec {
  std::vector<EigBlocks> eigenvalues;  // sorted lexicographically (re, im)
  int total() const;
};

// Detect the Jordan structure of C. tol >= 0 fixes the eigenvalue
// clustering radius; tol < 0 walks a coarse-to-fine ladder and accepts
// the first radius whose rank sequences are self-consistent.
JordanSpec jordan_structure(const CMat& C, double tol = -1.0);

// Relative closeness used when matching eigenvalues to their partners.
bool near_eig(Cx a, Cx b);

// One pairing class: the eigenvalues it contains (lambda with 1/lambda,
// plus conjugates over the reals), the deterministic representative and
// the block sizes shared by all members.
struct PairClass {
  std::vector<Cx> members;
  Cx rep;
  std::vector<int> sizes;  // descending
  bool self_paired = false;
};

// Group the eigenvalues of the spec into pairing classes. Throws
// StructureError when a partner is missing or block sizes disagree
// across a class.
std::vector<PairClass> pair_classes(const JordanSpec& spec, Involution inv,
                                    Field field);

struct ChainOptions {
  double tol = -1.0;            // absolute rank threshold; < 0 = ladder
  std::uint64_t mix_seed = 0;   // nonzero: remix chain tops (span-preserving)
  bool alt_representative = false;  // use the partner eigenvalue instead
};

// Jordan chain matrices of C at lam: one n x r matrix per block, sizes
// descending, satisfying (C - lam I) w_j = w_{j-1} column-wise.
std::vector<CMat> chains_at(const CMat& C, Cx lam,
                            const std::vector<int>& sizes,
                            const ChainOptions& opts = {});

// Chains for one pairing class: W for C at the representative and U for
// C^{-1} at the same eigenvalue (T) or its conjugate (H). For real
// inputs with nonreal eigenvalues both are realified to [Re | Im] with
// block relation C W = W realify(J_r^lambda).
struct ChainSet {
  Cx rep;
  std::vector<Cx> members;
  std::vector<int> sizes;
  std::vector<CMat> W;
  std::vector<CMat> U;
  bool realified = false;
  // Chains at the reciprocal partner 1/rep, filled only for realified
  // classes off the unit circle: those contribute generators at both
  // representatives. Same realified layout as W/U.
  Cx rep2{0.0, 0.0};
  std::vector<CMat> W2;
  std::vector<CMat> U2;
};

std::vector<ChainSet> jordan_chains(const CMat& C, const JordanSpec& spec,
                                    Involution inv, Field field,
                                    const ChainOptions& opts = {});

// Chains of C at every eigenvalue of the spec (no pairing involved),
// indexed like spec.eigenvalues.
using ChainList = std::vector<std::vector<CMat>>;
ChainList eigen_chains(const CMat& C, const JordanSpec& spec,
                       const ChainOptions& opts = {});

// Basis of {Z : ZC = CZ} via W E_k P^T over same-eigenvalue block pairs,
// with Wch chains of C and Pch chains of C^T (eigen_chains on both).
std::vector<CMat> centralizer_basis(const CMat& C, const JordanSpec& spec,
                                    const ChainList& Wch,
                                    const ChainList& Pch);
std::vector<CMat> centralizer_basis(const CMat& C, const JordanSpec& spec,
                                    double tol = -1.0);

// dim cent = sum r_j + sum_{j<k, same eigenvalue} min(2 r_j, 2 r_k).
int centralizer_dimension(const JordanSpec& spec);

// {"eigenvalues": [{"eigenvalue": [re, im], "blocks": [...]}, ...],
//  "pairing": [[[re, im], ...], ...]}
nlohmann::json jordan_spec_to_json(const JordanSpec& spec, Involution inv,
                                   Field field);
JordanSpec jordan_spec_from_json(const nlohmann::json& j);

}  // namespace autgrp::eigenstructure
