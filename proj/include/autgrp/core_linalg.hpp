#pragma once

// Shared linear-algebra kernel: rank-revealing SVD helpers, the vec()
// operators for X*J +/- JX, matrix (de)serialization and the seeded RNG.
// Everything downstream works on complex matrices; real inputs are
// embedded and tracked through the Field tag.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace autgrp::core_linalg {

using Cx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

enum class Field { Real, Complex };
enum class Involution { T, H };

// Input matrix is singular where a nonsingular one is required.
struct SingularInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structure detection could not reconcile the computed invariants
// (ill-conditioned input or an internal inconsistency).
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string field_name(Field f);
std::string involution_name(Involution inv);
Field parse_field(const std::string& s);
Involution parse_involution(const std::string& s);

// A matrix with its declared field. `a` always stores complex entries;
// `field == Real` asserts the imaginary parts are (exactly) zero and
// controls how the matrix is serialized.
struct Mat {
  CMat a;
  Field field = Field::Complex;

  static Mat real(const RMat& m);
  static Mat complex(const CMat& m);
  int rows() const { return static_cast<int>(a.rows()); }
  int cols() const { return static_cast<int>(a.cols()); }
};

nlohmann::json mat_to_json(const Mat& m);
Mat mat_from_json(const nlohmann::json& j);

// A^T or A^H depending on the involution.
CMat adj(const CMat& A, Involution inv);

// a x b matrix with ones on the k-th antidiagonal (i + j == k - 1,
// zero based). For k == a == b this is the backwards identity.
CMat backwards_identity(int k, int a, int b);

// [[Re A, Im A], [-Im A, Re A]], the standard real embedding.
RMat realify(const CMat& A);

// Singular values, descending.
RVec svdvals(const CMat& A);

// Orthonormal basis of the (right) nullspace. rtol < 0 selects the
// default threshold max(m, n) * eps * sigma_max; otherwise the cut is
// rtol * sigma_max.
CMat nullspace(const CMat& A, double rtol = -1.0);

// Same but with an absolute singular-value cut. Used inside the pencil
// computations where the matrix under inspection may legitimately be
// (close to) zero and its own norm is meaningless as a scale.
CMat nullspace_abs(const CMat& A, double tol);

// Orthonormal basis of the column space (s > tol kept).
CMat orth(const CMat& A, double rtol = -1.0);

// Leading left singular vectors together with all singular values.
CMat svd_left(const CMat& A, RVec* singular_values = nullptr);

// Minimum-norm least-squares solution of A X = B.
CMat lstsq(const CMat& A, const CMat& B);

// Row-major flattening; matches the element order of the CSV export.
CVec vec(const CMat& X);
CMat unvec(const CVec& v, int rows, int cols);

// Matrix of X -> X^T J + sign * J X acting on vec(X), complex n^2 x n^2.
CMat t_operator(const CMat& J, int sign);

// Matrix of X -> X^H J + sign * J X as a real-linear operator on
// [vec(Re X); vec(Im X)], real 2n^2 x 2n^2.
RMat h_operator(const CMat& J, int sign);

// Smallest cosine of the principal angles between the column spans of
// two orthonormal matrices (1 when both are empty).
double min_subspace_cosine(const CMat& Qa, const CMat& Qb);

// Coordinate system used when reducing a list of matrices to a linearly
// independent subset.
//   Complex       complex span of the matrices as they are
//   SplitRealImag real span; each matrix contributes Re and Im separately
//   RealGram      real span of the complex matrices themselves (iX != X)
enum class SpanMode { Complex, SplitRealImag, RealGram };

// Greedy rank-revealing reduction: keep an element iff its coordinate
// vector sticks out of the span of the kept ones by more than tol
// relatively. Kept elements are normalized to unit coordinate norm; in
// SplitRealImag mode the output matrices are the real/imaginary parts.
// When kept_from is given it receives, per kept element, the index of
// the input it came from (repeated when a split keeps both halves).
std::vector<CMat> rank_reduce(const std::vector<CMat>& elems, SpanMode mode,
                              double tol = 1e-8,
                              std::vector<int>* kept_from = nullptr);

// n choose k as a double (exact for the small arguments we use).
double comb(int n, int k);

// Stateless 64-bit mix (splitmix64 finalizer).
std::uint64_t splitmix64(std::uint64_t x);

// Counter-based generator: value_i = mix(seed ^ mix(stream ^ mix(i))).
// Streams let independent consumers draw from one seed without
// coordinating counters.
struct Rng {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  Rng(std::uint64_t seed_, std::uint64_t stream_ = 0)
      : seed(seed_), stream(stream_) {}

  std::uint64_t next_u64();
  double u01();                          // uniform [0, 1)
  double uniform(double lo, double hi);  // uniform [lo, hi)
  double normal();                       // standard normal (Box-Muller)
  Cx cnormal();                          // complex standard normal

 private:
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Gaussian matrix; complex entries draw independent real/imag parts.
CMat random_gaussian(int rows, int cols, Rng& rng, bool complex_entries);

}  // namespace autgrp::core_linalg
