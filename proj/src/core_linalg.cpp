#include "autgrp/core_linalg.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace autgrp::core_linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Jacobi is accurate and fast enough for the small blocks we mostly
// see; divide-and-conquer takes over for the vectorized operators.
constexpr int kJacobiLimit = 32;

struct SvdParts {
  CMat U;  // thin
  RVec S;
  CMat V;  // full
};

SvdParts svd_parts(const CMat& A, bool want_u, bool want_full_v) {
  SvdParts out;
  if (A.rows() == 0 || A.cols() == 0) {
    out.U = CMat(A.rows(), 0);
    out.S = RVec(0);
    out.V = want_full_v ? CMat::Identity(A.cols(), A.cols()) : CMat(A.cols(), 0);
    return out;
  }
  unsigned opts = 0;
  if (want_u) opts |= Eigen::ComputeThinU;
  if (want_full_v) opts |= Eigen::ComputeFullV;
  if (std::min(A.rows(), A.cols()) <= kJacobiLimit) {
    Eigen::JacobiSVD<CMat> svd(A, opts);
    out.U = want_u ? CMat(svd.matrixU()) : CMat();
    out.S = svd.singularValues();
    out.V = want_full_v ? CMat(svd.matrixV()) : CMat();
  } else {
    Eigen::BDCSVD<CMat> svd(A, opts);
    out.U = want_u ? CMat(svd.matrixU()) : CMat();
    out.S = svd.singularValues();
    out.V = want_full_v ? CMat(svd.matrixV()) : CMat();
  }
  return out;
}

}  // namespace

std::string field_name(Field f) {
  return f == Field::Real ? "real" : "complex";
}

std::string involution_name(Involution inv) {
  return inv == Involution::T ? "T" : "H";
}

Field parse_field(const std::string& s) {
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  throw std::invalid_argument("unknown field: " + s);
}

Involution parse_involution(const std::string& s) {
  if (s == "T") return Involution::T;
  if (s == "H") return Involution::H;
  throw std::invalid_argument("unknown involution: " + s + " (expected T or H)");
}

Mat Mat::real(const RMat& m) {
  Mat out;
  out.a = m.cast<Cx>();
  out.field = Field::Real;
  return out;
}

Mat Mat::complex(const CMat& m) {
  Mat out;
  out.a = m;
  out.field = Field::Complex;
  return out;
}

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["field"] = field_name(m.field);
  nlohmann::json data = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < m.cols(); ++k) {
      const Cx v = m.a(i, k);
      if (m.field == Field::Real) {
        row.push_back(v.real());
      } else {
        row.push_back(nlohmann::json::array({v.real(), v.imag()}));
      }
    }
    data.push_back(std::move(row));
  }
  j["data"] = std::move(data);
  return j;
}

Mat mat_from_json(const nlohmann::json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix size");
  Mat out;
  out.field = parse_field(j.at("field").get<std::string>());
  out.a = CMat::Zero(rows, cols);
  const auto& data = j.at("data");
  if (static_cast<int>(data.size()) != rows)
    throw std::invalid_argument("matrix data has wrong number of rows");
  for (int i = 0; i < rows; ++i) {
    const auto& row = data.at(i);
    if (static_cast<int>(row.size()) != cols)
      throw std::invalid_argument("matrix data has ragged rows");
    for (int k = 0; k < cols; ++k) {
      const auto& cell = row.at(k);
      if (cell.is_array()) {
        if (cell.size() != 2)
          throw std::invalid_argument("complex entry must be [re, im]");
        out.a(i, k) = Cx(cell.at(0).get<double>(), cell.at(1).get<double>());
      } else {
        out.a(i, k) = Cx(cell.get<double>(), 0.0);
      }
    }
  }
  if (out.field == Field::Real && out.a.imag().cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("matrix declared real has nonzero imaginary parts");
  return out;
}

CMat adj(const CMat& A, Involution inv) {
  if (inv == Involution::T) return A.transpose();
  return A.adjoint();
}

CMat backwards_identity(int k, int a, int b) {
  CMat E = CMat::Zero(a, b);
  for (int i = 0; i < a; ++i) {
    const int j = k - 1 - i;
    if (j >= 0 && j < b) E(i, j) = 1.0;
  }
  return E;
}

RMat realify(const CMat& A) {
  const auto n = A.rows();
  const auto m = A.cols();
  RMat out(2 * n, 2 * m);
  out.topLeftCorner(n, m) = A.real();
  out.topRightCorner(n, m) = A.imag();
  out.bottomLeftCorner(n, m) = -A.imag();
  out.bottomRightCorner(n, m) = A.real();
  return out;
}

RVec svdvals(const CMat& A) { return svd_parts(A, false, false).S; }

CMat nullspace(const CMat& A, double rtol) {
  if (A.rows() == 0) return CMat::Identity(A.cols(), A.cols());
  SvdParts p = svd_parts(A, false, true);
  const double smax = p.S.size() > 0 ? p.S(0) : 0.0;
  const double tol = (rtol < 0.0)
                         ? std::max(A.rows(), A.cols()) * kEps * smax
                         : rtol * smax;
  return nullspace_abs(A, tol);
}

CMat nullspace_abs(const CMat& A, double tol) {
  if (A.rows() == 0) return CMat::Identity(A.cols(), A.cols());
  SvdParts p = svd_parts(A, false, true);
  int keep = static_cast<int>(A.cols()) - static_cast<int>(p.S.size());
  for (int i = static_cast<int>(p.S.size()) - 1; i >= 0; --i) {
    if (p.S(i) <= tol)
      ++keep;
    else
      break;
  }
  return p.V.rightCols(keep);
}

CMat orth(const CMat& A, double rtol) {
  if (A.rows() == 0 || A.cols() == 0) return CMat(A.rows(), 0);
  SvdParts p = svd_parts(A, true, false);
  const double smax = p.S.size() > 0 ? p.S(0) : 0.0;
  const double tol = (rtol < 0.0)
                         ? std::max(A.rows(), A.cols()) * kEps * smax
                         : rtol * smax;
  int keep = 0;
  while (keep < p.S.size() && p.S(keep) > tol) ++keep;
  return p.U.leftCols(keep);
}

CMat svd_left(const CMat& A, RVec* singular_values) {
  SvdParts p = svd_parts(A, true, false);
  if (singular_values) *singular_values = p.S;
  return p.U;
}

CMat lstsq(const CMat& A, const CMat& B) {
  return A.completeOrthogonalDecomposition().solve(B);
}

CVec vec(const CMat& X) {
  CVec v(X.rows() * X.cols());
  int idx = 0;
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < X.cols(); ++j) v(idx++) = X(i, j);
  return v;
}

CMat unvec(const CVec& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("unvec: size mismatch");
  CMat X(rows, cols);
  int idx = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = v(idx++);
  return X;
}

namespace {

// Matrix of X -> X^T M on vec(X): coefficient of X(k, l) in (X^T M)(i, j)
// is M(k, j) when l == i.
CMat op_left_transpose(const CMat& M) {
  const int n = static_cast<int>(M.rows());
  CMat out = CMat::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i * n + j, k * n + i) = M(k, j);
  return out;
}

// Matrix of X -> M X on vec(X): coefficient of X(k, j) in (M X)(i, j)
// is M(i, k).
CMat op_right(const CMat& M) {
  const int n = static_cast<int>(M.rows());
  CMat out = CMat::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i * n + j, k * n + j) = M(i, k);
  return out;
}

}  // namespace

CMat t_operator(const CMat& J, int sign) {
  return op_left_transpose(J) + static_cast<double>(sign) * op_right(J);
}

RMat h_operator(const CMat& J, int sign) {
  const int n = static_cast<int>(J.rows());
  const double s = static_cast<double>(sign);
  const CMat Jr = J.real().cast<Cx>();
  const CMat Ji = J.imag().cast<Cx>();
  const RMat Lr = op_left_transpose(Jr).real();
  const RMat Rr = op_right(Jr).real();
  const RMat Li = op_left_transpose(Ji).real();
  const RMat Ri = op_right(Ji).real();
  // X = A + iB; real/imag parts of X^H J + sign * J X in terms of A, B.
  RMat out(2 * n * n, 2 * n * n);
  out.topLeftCorner(n * n, n * n) = Lr + s * Rr;
  out.topRightCorner(n * n, n * n) = Li - s * Ri;
  out.bottomLeftCorner(n * n, n * n) = Li + s * Ri;
  out.bottomRightCorner(n * n, n * n) = -Lr + s * Rr;
  return out;
}

double min_subspace_cosine(const CMat& Qa, const CMat& Qb) {
  if (Qa.cols() == 0 && Qb.cols() == 0) return 1.0;
  if (Qa.cols() == 0 || Qb.cols() == 0) return 0.0;
  RVec s = svdvals(Qa.adjoint() * Qb);
  return s(s.size() - 1);
}

std::vector<CMat> rank_reduce(const std::vector<CMat>& elems, SpanMode mode,
                              double tol, std::vector<int>* kept_from) {
  std::vector<CMat> kept;
  if (kept_from) kept_from->clear();
  CMat B;  // orthonormal coordinate basis of the kept elements

  auto candidates = [mode](const CMat& el) {
    std::vector<std::pair<CMat, CVec>> out;
    if (mode == SpanMode::Complex) {
      out.emplace_back(el, vec(el));
    } else if (mode == SpanMode::SplitRealImag) {
      CMat re = el.real().cast<Cx>(), im = el.imag().cast<Cx>();
      out.emplace_back(re, vec(re));
      out.emplace_back(im, vec(im));
    } else {
      CVec v(2 * el.size());
      v.head(el.size()) = vec(el.real().cast<Cx>());
      v.tail(el.size()) = vec(el.imag().cast<Cx>());
      out.emplace_back(el, v);
    }
    return out;
  };

  for (std::size_t i = 0; i < elems.size(); ++i) {
    for (auto& [mat, v] : candidates(elems[i])) {
      const double nv = v.norm();
      if (nv < 1e-12) continue;
      if (B.cols() == 0) {
        kept.push_back(mat / nv);
        if (kept_from) kept_from->push_back(static_cast<int>(i));
        B = v / nv;
        continue;
      }
      CVec resid = v - B * (B.adjoint() * v);
      const double rn = resid.norm();
      if (rn > tol * nv) {
        kept.push_back(mat / nv);
        if (kept_from) kept_from->push_back(static_cast<int>(i));
        B.conservativeResize(Eigen::NoChange, B.cols() + 1);
        B.col(B.cols() - 1) = resid / rn;
      }
    }
  }
  return kept;
}

double comb(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return std::round(out);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::next_u64() {
  return splitmix64(seed ^ splitmix64(stream ^ splitmix64(counter++)));
}

double Rng::u01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - u01();  // (0, 1], keeps the log finite
  const double u2 = u01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

Cx Rng::cnormal() {
  const double re = normal();
  const double im = normal();
  return Cx(re, im);
}

CMat random_gaussian(int rows, int cols, Rng& rng, bool complex_entries) {
  CMat out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out(i, j) = complex_entries ? rng.cnormal() : Cx(rng.normal(), 0.0);
  return out;
}

}  // namespace autgrp::core_linalg
