#include "autgrp/group_sampler.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace autgrp::group_sampler {

using core_linalg::adj;
using core_linalg::Cx;
using core_linalg::CVec;
using core_linalg::Rng;
using core_linalg::RVec;
using solution_basis::sol_basis;
using solution_basis::SolutionBasis;

double membership_residual(const CMat& G, const CMat& J, Involution inv) {
  if (G.rows() != G.cols() || J.rows() != J.cols() || G.rows() != J.rows())
    throw std::invalid_argument("membership_residual: shapes do not match");
  return (adj(G, inv) * J * G - J).norm();
}

double membership_residual(const Mat& G, const Mat& J, Involution inv) {
  return membership_residual(G.a, J.a, inv);
}

CMat exp_map(const CMat& X) {
  if (X.rows() != X.cols())
    throw std::invalid_argument("exp_map: X must be square");
  return X.exp();
}

namespace {

// Coefficient draw for one sample: real bases take m reals, a complex
// basis m complex numbers (real and imaginary part in that order).
CMat tangent_combination(const SolutionBasis& b, int n, Rng& rng,
                         double scale) {
  CMat X = CMat::Zero(n, n);
  for (const CMat& S : b.elements) {
    if (b.real_space) {
      X += rng.uniform(-scale, scale) * S;
    } else {
      const double re = rng.uniform(-scale, scale);
      const double im = rng.uniform(-scale, scale);
      X += Cx(re, im) * S;
    }
  }
  return X;
}

}  // namespace

std::vector<CMat> sample_group(const Mat& J, Involution inv,
                               const SampleConfig& cfg) {
  if (cfg.N < 0) throw std::invalid_argument("sample_group: N must be >= 0");
  const SolutionBasis b = sol_basis(J, inv);
  const int n = J.rows();
  std::vector<CMat> out;
  out.reserve(cfg.N);
  for (int i = 0; i < cfg.N; ++i) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(i));
    out.push_back(exp_map(tangent_combination(b, n, rng, cfg.scale)));
  }
  return out;
}

RMat projection_frame(int coord_dim, std::uint64_t seed) {
  if (coord_dim < 3)
    throw std::domain_error("projection_frame: need at least 3 coordinates");
  Rng rng(seed, ~std::uint64_t{0});
  for (;;) {
    const CMat Q =
        core_linalg::orth(core_linalg::random_gaussian(coord_dim, 3, rng,
                                                       false));
    if (Q.cols() == 3) return Q.real();
  }
}

RMat project_cloud(const Mat& J, Involution inv, const SampleConfig& cfg,
                   ProjectMode mode) {
  const int n = J.rows();
  if (n != J.cols())
    throw std::invalid_argument("project_cloud: J must be square");
  const bool realcoords = inv == Involution::T && J.field == Field::Real;
  const int d = realcoords ? n * n : 2 * n * n;
  const RMat Q = projection_frame(d, cfg.seed);

  std::vector<CMat> gs;
  if (mode == ProjectMode::Scatter) {
    gs = sample_group(J, inv, cfg);
  } else {
    const SolutionBasis b = sol_basis(J, inv);
    if (b.dim() != 2)
      throw std::domain_error(
          "project_cloud: surface grid needs a two dimensional tangent "
          "space");
    const long g = std::llround(std::sqrt(static_cast<double>(cfg.N)));
    if (g > 0) {
      const RVec ticks =
          RVec::LinSpaced(g, -cfg.scale, g == 1 ? -cfg.scale : cfg.scale);
      gs.reserve(g * g);
      for (long i1 = 0; i1 < g; ++i1)
        for (long i2 = 0; i2 < g; ++i2)
          gs.push_back(exp_map(ticks(i1) * b.elements[0] +
                               ticks(i2) * b.elements[1]));
    }
  }

  RMat out(static_cast<Eigen::Index>(gs.size()), 3);
  RVec coords(d);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const CVec v = core_linalg::vec(gs[i]);
    if (realcoords) {
      coords = v.real();
    } else {
      coords.head(n * n) = v.real();
      coords.tail(n * n) = v.imag();
    }
    out.row(static_cast<Eigen::Index>(i)) = (Q.transpose() * coords).transpose();
  }
  return out;
}

// ---------------------------------------------------------------------

namespace {

constexpr double kProfileTol = 1e-6;

bool near_one_abs(Cx l) { return std::abs(std::abs(l) - 1.0) < kProfileTol; }

}  // namespace

Classification2x2 classify_2x2(const Mat& J) {
  if (J.field != Field::Real || J.rows() != 2 || J.cols() != 2)
    throw std::invalid_argument("classify_2x2: needs a real 2x2 matrix");
  const RMat A = J.a.real();
  const double tol = 1e-10 * std::max(1.0, A.norm());

  const RMat S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(S);
  int pos = 0, neg = 0;
  for (int i = 0; i < 2; ++i) {
    if (es.eigenvalues()(i) > tol) ++pos;
    if (es.eigenvalues()(i) < -tol) ++neg;
  }
  Classification2x2 c;
  c.sig_pos = std::max(pos, neg);  // unordered signature, larger first
  c.sig_neg = std::min(pos, neg);
  const double skew = 0.5 * (A(0, 1) - A(1, 0));
  c.rank_skew = std::abs(skew) > tol ? 2 : 0;

  const RVec sv = core_linalg::svdvals(J.a);
  const bool nonsingular = sv(1) > 1e-10 * sv(0);

  const int sp = c.sig_pos, sn = c.sig_neg, ra = c.rank_skew;
  if (ra == 0) {
    if (sp == 2) {
      c.case_id = 3;
      c.cosquare_tag = "J_1^1 + J_1^1";
      c.group = "O(2)";
      c.dimension = 1;
    } else if (sp == 1 && sn == 1) {
      c.case_id = 4;
      c.cosquare_tag = "J_1^1 + J_1^1";
      c.group = "O(1,1)";
      c.dimension = 1;
    } else if (sp == 1) {
      c.case_id = 8;
      c.cosquare_tag = "-";
      c.group = "{-1, 1} x Aff(1, R)";
      c.dimension = 2;
    } else {
      c.case_id = 9;
      c.cosquare_tag = "-";
      c.group = "GL(2, R)";
      c.dimension = 4;
    }
  } else {
    if (sp == 0) {
      c.case_id = 5;
      c.cosquare_tag = "J_1^-1 + J_1^-1";
      c.group = "SL(2, R) = Sp(2, R)";
      c.dimension = 3;
    } else if (sp == 2) {
      c.case_id = 2;
      c.cosquare_tag = "unit conjugate pair";
      c.group = "Circle";
      c.dimension = 1;
    } else if (sn == 0) {
      c.case_id = 6;
      c.cosquare_tag = "J_2^-1";
      c.group = "Two real lines";
      c.dimension = 1;
    } else if (nonsingular) {
      c.case_id = 1;
      c.cosquare_tag = "real reciprocal pair";
      c.group = "Hyperbola";
      c.dimension = 1;
    } else {
      c.case_id = 7;
      c.cosquare_tag = "-";
      c.group = "Hyperbola";
      c.dimension = 1;
    }
  }
  return c;
}

std::string profile_name(Profile4x4 p) {
  switch (p) {
    case Profile4x4::CircleCircle: return "circle x circle";
    case Profile4x4::PuncturedPlane: return "punctured plane";
    case Profile4x4::HyperbolaCircle: return "hyperbola x circle";
    case Profile4x4::HyperbolaHyperbola: return "hyperbola x hyperbola";
    case Profile4x4::NonGeneric: return "non-generic";
  }
  return "?";
}

Profile4x4 profile_4x4(const Mat& J) {
  if (J.field != Field::Real || J.rows() != 4 || J.cols() != 4)
    throw std::invalid_argument("profile_4x4: needs a real 4x4 matrix");
  const RVec sv = core_linalg::svdvals(J.a);
  if (sv(3) <= 1e-10 * sv(0)) return Profile4x4::NonGeneric;

  const CMat C = eigenstructure::cosquare(J.a, Involution::T);
  Eigen::ComplexEigenSolver<CMat> es(C);
  const CVec l = es.eigenvalues();

  // Genericity: four distinct eigenvalues, none at the self-reciprocal
  // points +-1 (those change the tangent dimension).
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j)
      if (eigenstructure::near_eig(l(i), l(j))) return Profile4x4::NonGeneric;
    if (std::abs(l(i) - 1.0) < kProfileTol ||
        std::abs(l(i) + 1.0) < kProfileTol)
      return Profile4x4::NonGeneric;
  }

  int real_cnt = 0, unit_cnt = 0, quad_cnt = 0;
  for (int i = 0; i < 4; ++i) {
    const bool realish =
        std::abs(l(i).imag()) < kProfileTol * std::max(1.0, std::abs(l(i)));
    if (realish)
      ++real_cnt;  // real reciprocal pair member
    else if (near_one_abs(l(i)))
      ++unit_cnt;  // unit conjugate pair member
    else
      ++quad_cnt;  // nonreal nonunit quadruple member
  }
  if (unit_cnt == 4) return Profile4x4::CircleCircle;
  if (quad_cnt == 4) return Profile4x4::PuncturedPlane;
  if (unit_cnt == 2 && real_cnt == 2) return Profile4x4::HyperbolaCircle;
  if (real_cnt == 4) return Profile4x4::HyperbolaHyperbola;
  return Profile4x4::NonGeneric;
}

// ---------------------------------------------------------------------

namespace {

void append_double(std::string& s, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

}  // namespace

std::string cloud_to_csv(const RMat& pts) {
  std::string s = "x,y,z\n";
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      if (j) s.push_back(',');
      append_double(s, pts(i, j));
    }
    s.push_back('\n');
  }
  return s;
}

std::string samples_to_csv(const std::vector<CMat>& gs,
                           bool complex_entries) {
  if (gs.empty()) return {};
  const Eigen::Index n = gs[0].rows(), m = gs[0].cols();
  std::string s;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::string cell =
          "g" + std::to_string(i + 1) + std::to_string(j + 1);
      if (!s.empty()) s.push_back(',');
      if (complex_entries)
        s += cell + "_re," + cell + "_im";
      else
        s += cell;
    }
  s.push_back('\n');
  for (const CMat& G : gs) {
    bool first = true;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        if (!first) s.push_back(',');
        first = false;
        append_double(s, G(i, j).real());
        if (complex_entries) {
          s.push_back(',');
          append_double(s, G(i, j).imag());
        }
      }
    s.push_back('\n');
  }
  return s;
}

std::string cloud_to_ply(const RMat& pts) {
  std::string s = "ply\nformat ascii 1.0\nelement vertex " +
                  std::to_string(pts.rows()) +
                  "\nproperty double x\nproperty double y\nproperty double "
                  "z\nend_header\n";
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      if (j) s.push_back(' ');
      append_double(s, pts(i, j));
    }
    s.push_back('\n');
  }
  return s;
}

std::string gnuplot_script(const std::string& csv_path, ProjectMode mode) {
  std::string s = "set datafile separator ','\nset ticslevel 0\n";
  if (mode == ProjectMode::SurfaceGrid)
    s += "# ordered g x g grid, first coefficient outermost\n";
  s += "splot '" + csv_path +
       "' skip 1 using 1:2:3 with points pt 7 ps 0.3 notitle\n";
  return s;
}

}  // namespace autgrp::group_sampler
