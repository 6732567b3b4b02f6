#pragma once

// Sampling the automorphism group {G : G*JG = J} by the exponential map
// over a tangent basis, 3-D projection export for visualization, and the
// small-size classifiers: the nine-case 2x2 table and the four generic
// 4x4 eigenvalue profiles.

#include "autgrp/core_linalg.hpp"
#include "autgrp/solution_basis.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace autgrp::group_sampler {

using core_linalg::CMat;
using core_linalg::Field;
using core_linalg::Involution;
using core_linalg::Mat;
using core_linalg::RMat;

// ||G*JG - J||_F; exactly zero on group members. Throws
// std::invalid_argument on shape mismatch.
double membership_residual(const CMat& G, const CMat& J, Involution inv);
double membership_residual(const Mat& G, const Mat& J, Involution inv);

// Matrix exponential, scaling-and-squaring with a Pade kernel.
CMat exp_map(const CMat& X);

struct SampleConfig {
  int N = 0;               // sample count
  std::uint64_t seed = 0;  // master seed; sample i draws on RNG stream i
  double scale = 1.0;      // coefficients uniform on [-scale, scale]
};

// Draw coefficients r and emit exp(sum_j r_j S_j) over the sol(J) basis
// S; covers the identity component. Real-space bases (real J under
// transpose, anything under conjugate-transpose) take real coefficients;
// a complex basis draws real and imaginary parts separately, since the
// tangent space is a complex vector space. Identical configs produce
// identical samples, and each sample depends only on (seed, index).
std::vector<CMat> sample_group(const Mat& J, Involution inv,
                               const SampleConfig& cfg);

enum class ProjectMode { Scatter, SurfaceGrid };

// The orthonormal d x 3 projection frame drawn on the reserved stream
// ~0 of the seed (so frames never collide with sample streams).
// coord_dim below 3 throws std::domain_error.
RMat projection_frame(int coord_dim, std::uint64_t seed);

// Projected coordinates Q^T vec(G) of sampled group elements, one row
// per sample. Real matrices project their n^2 vec coordinates, complex
// ones the 2n^2 realified coordinates [Re; Im]. Scatter emits cfg.N
// rows. SurfaceGrid substitutes the two coefficients by a g x g grid
// over [-scale, scale]^2 (g = round(sqrt(N)); rows ordered with the
// first coefficient outermost) and requires dim sol(J) = 2 -- anything
// else throws std::domain_error.
RMat project_cloud(const Mat& J, Involution inv, const SampleConfig& cfg,
                   ProjectMode mode);

// ---------------------------------------------------------------------
// Small-size classifiers.

// One row of the nine-case table for real 2x2 J, keyed by the
// congruence invariants: signature of the symmetric part (reported
// unordered, larger count first), rank of the skew part, and where the
// cosquare exists its eigenvalue tag.
struct Classification2x2 {
  int case_id = 0;       // 1..9
  int sig_pos = 0;       // larger signature count of S
  int sig_neg = 0;       // smaller signature count of S
  int rank_skew = 0;     // 0 or 2
  std::string cosquare_tag;  // "-" when J is singular
  std::string group;         // printable group description
  int dimension = 0;         // dim of the tangent space
};

// Exhaustive over all real 2x2 inputs. Throws std::invalid_argument for
// anything that is not real 2x2.
Classification2x2 classify_2x2(const Mat& J);

// Generic real 4x4 profiles by the cosquare eigenvalue configuration:
// two unit conjugate pairs, one nonreal nonunit quadruple, one real
// reciprocal pair with one unit pair, or two real reciprocal pairs.
// Singular J, repeated eigenvalues, or eigenvalues at +-1 fall outside
// the four generic classes and report NonGeneric.
enum class Profile4x4 {
  CircleCircle,
  PuncturedPlane,
  HyperbolaCircle,
  HyperbolaHyperbola,
  NonGeneric
};

std::string profile_name(Profile4x4 p);

Profile4x4 profile_4x4(const Mat& J);

// ---------------------------------------------------------------------
// Plain-text emitters. Floats are printed as shortest round-trip
// decimals, so identical data gives byte-identical text.

// Header x,y,z and one row per point.
std::string cloud_to_csv(const RMat& pts);

// Header g11,g12,... in row-major entry order; complex samples emit
// g11_re,g11_im,... instead. Empty sample lists give an empty string.
std::string samples_to_csv(const std::vector<CMat>& gs,
                           bool complex_entries);

// ASCII PLY point cloud of the projected rows.
std::string cloud_to_ply(const RMat& pts);

// Minimal gnuplot script plotting a CSV emitted by cloud_to_csv.
std::string gnuplot_script(const std::string& csv_path, ProjectMode mode);

}  // namespace autgrp::group_sampler
