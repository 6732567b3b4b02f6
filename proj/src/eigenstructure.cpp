#include "autgrp/eigenstructure.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace autgrp::eigenstructure {

using core_linalg::backwards_identity;
using core_linalg::nullspace_abs;
using core_linalg::orth;
using core_linalg::Rng;
using core_linalg::StructureError;
using core_linalg::svd_left;
using core_linalg::svdvals;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string cx_str(Cx z) {
  std::ostringstream os;
  os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  return os.str();
}

double round_to(double x, int digits) {
  const double p = std::pow(10.0, digits);
  return std::round(x * p) / p;
}

// Weyr characteristic of C at lam (nullity increments of (C - lam I)^k),
// via the projected-nullspace filtration null(M^k) = {v : Mv in null(M^{k-1})}.
// Returns false when the increments cannot account for cluster_size.
bool weyr_at(const CMat& C, Cx lam, double rank_tol, int cluster_size,
             std::vector<int>* weyr) {
  const int n = static_cast<int>(C.rows());
  const CMat M = C - lam * CMat::Identity(n, n);
  weyr->clear();
  CMat V;  // orthonormal basis of null(M^{k-1})
  int cum = 0;
  for (int k = 1; cum < cluster_size && k <= cluster_size; ++k) {
    CMat A = (V.cols() == 0) ? M : CMat(M - V * (V.adjoint() * M));
    CMat G = nullspace_abs(A, rank_tol);
    const int wk = static_cast<int>(G.cols()) - cum;
    if (wk <= 0) return false;
    if (!weyr->empty() && wk > weyr->back()) return false;  // not monotone
    weyr->push_back(wk);
    cum += wk;
    V = G;
  }
  return cum == cluster_size;
}

std::vector<int> conjugate_partition(const std::vector<int>& weyr) {
  std::vector<int> sizes;
  if (weyr.empty()) return sizes;
  for (int j = 1; j <= weyr[0]; ++j) {
    int cnt = 0;
    for (int wk : weyr)
      if (wk >= j) ++cnt;
    sizes.push_back(cnt);  // already descending in j
  }
  return sizes;
}

std::vector<std::vector<Cx>> single_linkage(const std::vector<Cx>& vals,
                                            double rad) {
  const int m = static_cast<int>(vals.size());
  std::vector<int> comp(m, -1);
  std::vector<std::vector<Cx>> clusters;
  for (int i = 0; i < m; ++i) {
    if (comp[i] >= 0) continue;
    const int id = static_cast<int>(clusters.size());
    clusters.push_back({});
    std::vector<int> queue = {i};
    comp[i] = id;
    while (!queue.empty()) {
      const int j = queue.back();
      queue.pop_back();
      clusters[id].push_back(vals[j]);
      for (int k = 0; k < m; ++k) {
        if (comp[k] >= 0) continue;
        const double lim =
            rad * std::max({1.0, std::abs(vals[j]), std::abs(vals[k])});
        if (std::abs(vals[j] - vals[k]) <= lim) {
          comp[k] = id;
          queue.push_back(k);
        }
      }
    }
  }
  return clusters;
}

}  // namespace

int JordanSpec::total() const {
  int t = 0;
  for (const auto& e : eigenvalues)
    for (int s : e.sizes) t += s;
  return t;
}

CMat cosquare(const CMat& J, Involution inv, double rtol) {
  if (J.rows() != J.cols())
    throw std::invalid_argument("cosquare: J must be square");
  const int n = static_cast<int>(J.rows());
  if (n == 0) return J;
  core_linalg::RVec s = svdvals(J);
  if (rtol < 0.0) rtol = n * kEps;
  if (s(n - 1) <= rtol * s(0)) {
    std::ostringstream os;
    os << "cosquare: J is numerically singular (sigma_min/sigma_max = "
       << (s(0) > 0 ? s(n - 1) / s(0) : 0.0)
       << "); use the pencil route in pencil_kronecker";
    throw core_linalg::SingularInput(os.str());
  }
  return core_linalg::adj(J, inv).partialPivLu().solve(J);
}

JordanSpec jordan_structure(const CMat& C, double tol) {
  const int n = static_cast<int>(C.rows());
  JordanSpec spec;
  if (n == 0) return spec;
  Eigen::ComplexEigenSolver<CMat> es(C, /*computeEigenvectors=*/false);
  std::vector<Cx> evals(es.eigenvalues().data(),
                        es.eigenvalues().data() + n);
  const double normC = svdvals(C)(0);

  std::vector<double> ladder;
  if (tol >= 0.0)
    ladder = {tol};
  else
    ladder = {3e-3, 1e-4, 3e-6, 1e-7, 3e-9, 1e-12};

  for (double rad : ladder) {
    auto clusters = single_linkage(evals, rad);
    spec.eigenvalues.clear();
    bool ok = true;
    for (const auto& cl : clusters) {
      Cx mean = 0.0;
      for (Cx v : cl) mean += v;
      mean /= static_cast<double>(cl.size());
      double spread = 0.0;
      for (Cx v : cl) spread = std::max(spread, std::abs(v - mean));
      const double rank_tol =
          std::max(200.0 * n * kEps * normC,
                   4.0 * spread * spread / std::max(1.0, std::abs(mean)));
      std::vector<int> w;
      if (!weyr_at(C, mean, rank_tol, static_cast<int>(cl.size()), &w)) {
        ok = false;
        break;
      }
      spec.eigenvalues.push_back({mean, conjugate_partition(w)});
    }
    if (ok) {
      std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(),
                [](const EigBlocks& a, const EigBlocks& b) {
                  if (a.eigenvalue.real() != b.eigenvalue.real())
                    return a.eigenvalue.real() < b.eigenvalue.real();
                  return a.eigenvalue.imag() < b.eigenvalue.imag();
                });
      return spec;
    }
  }
  throw StructureError(
      "jordan_structure: no clustering radius gave a consistent rank "
      "sequence (input may be too ill conditioned)");
}

bool near_eig(Cx a, Cx b) {
  return std::abs(a - b) <= 1e-6 * std::max({1.0, std::abs(a), std::abs(b)});
}

namespace {

std::vector<Cx> partner_values(Cx lam, Involution inv, Field field) {
  if (std::abs(lam) < 1e-12)
    throw StructureError("pair_classes: zero eigenvalue in a cosquare spectrum");
  if (inv == Involution::H) return {1.0 / std::conj(lam)};
  if (field == Field::Real) return {1.0 / lam, std::conj(lam)};
  return {1.0 / lam};
}

// Representative preference: largest |lambda| first, then the member in
// the closed upper half plane. The rounding makes the |lambda| = 1 and
// conjugate-pair ties deterministic.
bool rep_less(Cx a, Cx b, Field field, Involution inv) {
  const double ra = round_to(std::abs(a), 6), rb = round_to(std::abs(b), 6);
  if (ra != rb) return ra < rb;
  if (field == Field::Real && inv == Involution::T) {
    const double ia = round_to(std::abs(a.imag()), 9);
    const double ib = round_to(std::abs(b.imag()), 9);
    if (ia != ib) return ia < ib;
  }
  return a.imag() < b.imag();
}

}  // namespace

std::vector<PairClass> pair_classes(const JordanSpec& spec, Involution inv,
                                    Field field) {
  const auto& eigs = spec.eigenvalues;
  const int m = static_cast<int>(eigs.size());
  std::vector<bool> used(m, false);
  std::vector<PairClass> classes;

  for (int i = 0; i < m; ++i) {
    if (used[i]) continue;
    std::vector<int> members = {i};
    used[i] = true;
    std::vector<int> queue = {i};
    while (!queue.empty()) {
      const int j = queue.back();
      queue.pop_back();
      for (Cx v : partner_values(eigs[j].eigenvalue, inv, field)) {
        int hit = -1;
        for (int k = 0; k < m; ++k)
          if (near_eig(eigs[k].eigenvalue, v)) {
            hit = k;
            break;
          }
        if (hit < 0)
          throw StructureError("pair_classes: partner " + cx_str(v) +
                               " of eigenvalue " +
                               cx_str(eigs[j].eigenvalue) + " is missing");
        if (!used[hit]) {
          used[hit] = true;
          members.push_back(hit);
          queue.push_back(hit);
        }
      }
    }

    PairClass cl;
    for (int k : members) cl.members.push_back(eigs[k].eigenvalue);
    int rep_idx = members[0];
    for (int k : members)
      if (rep_less(eigs[rep_idx].eigenvalue, eigs[k].eigenvalue, field, inv))
        rep_idx = k;
    cl.rep = eigs[rep_idx].eigenvalue;
    cl.sizes = eigs[rep_idx].sizes;
    cl.self_paired = members.size() == 1;
    for (int k : members)
      if (eigs[k].sizes != cl.sizes)
        throw StructureError(
            "pair_classes: block sizes disagree inside the class of " +
            cx_str(cl.rep));
    classes.push_back(std::move(cl));
  }

  std::sort(classes.begin(), classes.end(),
            [](const PairClass& a, const PairClass& b) {
              if (a.rep.real() != b.rep.real())
                return a.rep.real() < b.rep.real();
              return a.rep.imag() < b.rep.imag();
            });
  return classes;
}

std::vector<CMat> chains_at(const CMat& C, Cx lam,
                            const std::vector<int>& sizes_in,
                            const ChainOptions& opts) {
  std::vector<int> sizes = sizes_in;
  std::sort(sizes.rbegin(), sizes.rend());
  if (sizes.empty()) return {};
  const int n = static_cast<int>(C.rows());
  const int kmax = sizes[0];
  const CMat M = C - lam * CMat::Identity(n, n);

  // Expected cumulative nullities from the target Weyr characteristic.
  std::vector<int> cum(kmax + 1, 0);
  for (int k = 1; k <= kmax; ++k) {
    int wk = 0;
    for (int s : sizes)
      if (s >= k) ++wk;
    cum[k] = cum[k - 1] + wk;
  }

  const double scale = svdvals(C)(0) + std::abs(lam);
  std::vector<double> ladder;
  if (opts.tol >= 0.0)
    ladder = {opts.tol};
  else
    ladder = {200.0 * n * kEps * scale, 1e-11 * scale, 1e-9 * scale,
              1e-7 * scale};

  const bool realish = C.imag().cwiseAbs().maxCoeff() == 0.0 &&
                       std::abs(lam.imag()) < 1e-12;

  for (double tol : ladder) {
    // Filtration Vs[k-1] = orthonormal basis of null(M^k).
    std::vector<CMat> Vs;
    bool dims_ok = true;
    for (int k = 1; k <= kmax; ++k) {
      CMat A = (k == 1) ? M : CMat(M - Vs.back() * (Vs.back().adjoint() * M));
      CMat G = nullspace_abs(A, tol);
      if (static_cast<int>(G.cols()) != cum[k]) {
        dims_ok = false;
        break;
      }
      Vs.push_back(std::move(G));
    }
    if (!dims_ok) continue;

    Rng rng(opts.mix_seed, 0);
    std::vector<std::vector<CVec>> used_at_level(kmax + 1);
    std::vector<CMat> chains;
    bool ok = true;

    for (std::size_t g = 0; g < sizes.size() && ok;) {
      const int s = sizes[g];
      int cnt = 0;
      while (g < sizes.size() && sizes[g] == s) {
        ++cnt;
        ++g;
      }
      // Candidates live in null(M^s) modulo null(M^{s-1}) and modulo the
      // level-s vectors already claimed by longer chains.
      const int lower = (s > 1) ? static_cast<int>(Vs[s - 2].cols()) : 0;
      CMat P(n, lower + static_cast<int>(used_at_level[s].size()));
      if (s > 1) P.leftCols(lower) = Vs[s - 2];
      for (std::size_t u = 0; u < used_at_level[s].size(); ++u)
        P.col(lower + u) = used_at_level[s][u];
      CMat Q = orth(P);
      CMat cand = Vs[s - 1];
      if (Q.cols() > 0) cand -= Q * (Q.adjoint() * cand);
      core_linalg::RVec sv;
      CMat Us = svd_left(cand, &sv);
      if (sv.size() < cnt || sv(cnt - 1) < 1e-7) {
        ok = false;  // chain tops deficient at this tolerance
        break;
      }
      CMat tops = Us.leftCols(cnt);
      if (opts.mix_seed != 0) {
        CMat mix = orth(core_linalg::random_gaussian(cnt, cnt, rng, !realish));
        tops = tops * mix;
        for (int c = 0; c < cnt; ++c) tops.col(c) *= (0.5 + rng.u01());
      }
      for (int c = 0; c < cnt; ++c) {
        CMat W(n, s);
        W.col(s - 1) = tops.col(c);
        for (int j = s - 1; j >= 1; --j) W.col(j - 1) = M * W.col(j);
        for (int j = 1; j <= s; ++j)
          used_at_level[j].push_back(W.col(j - 1));
        chains.push_back(std::move(W));
      }
    }
    if (!ok) continue;

    // Fix the free phase of each chain so equal inputs give equal outputs
    // (and real problems give real chains).
    for (CMat& W : chains) {
      int imax = 0;
      W.col(0).cwiseAbs().maxCoeff(&imax);
      const Cx p = W(imax, 0);
      if (std::abs(p) > 0) W *= std::conj(p) / std::abs(p);
    }
    return chains;
  }
  throw StructureError("chains_at: chain extraction failed at eigenvalue " +
                       cx_str(lam));
}

std::vector<ChainSet> jordan_chains(const CMat& C, const JordanSpec& spec,
                                    Involution inv, Field field,
                                    const ChainOptions& opts) {
  auto classes = pair_classes(spec, inv, field);
  const CMat Cinv = C.inverse();
  std::vector<ChainSet> out;

  for (const auto& cl : classes) {
    Cx rep = cl.rep;
    if (opts.alt_representative && !cl.self_paired) {
      // The partner generates the same spans (up to the documented index
      // swap); snap to the actually computed eigenvalue.
      Cx want = (inv == Involution::H) ? 1.0 / std::conj(rep)
                : (field == Field::Real && std::abs(rep.imag()) > 1e-8)
                    ? std::conj(rep)
                    : 1.0 / rep;
      for (Cx m : cl.members)
        if (near_eig(m, want)) {
          rep = m;
          break;
        }
    }
    const Cx lam_u = (inv == Involution::H) ? std::conj(rep) : rep;

    ChainOptions cw = opts;
    ChainOptions cu = opts;
    if (opts.mix_seed != 0) cu.mix_seed = opts.mix_seed + 1;
    std::vector<CMat> W = chains_at(C, rep, cl.sizes, cw);
    std::vector<CMat> U = chains_at(Cinv, lam_u, cl.sizes, cu);

    ChainSet cs;
    cs.rep = rep;
    cs.members = cl.members;
    cs.sizes = cl.sizes;
    cs.realified = false;

    const bool real_route = (field == Field::Real && inv == Involution::T);
    if (real_route && std::abs(rep.imag()) > 1e-8 * std::max(1.0, std::abs(rep))) {
      // Nonreal class of a real problem: [Re | Im] chains satisfying
      // C W = W realify(J_r^lambda).
      cs.realified = true;
      auto realify_chain = [](const CMat& A) {
        CMat R(A.rows(), 2 * A.cols());
        R.leftCols(A.cols()) = A.real().cast<Cx>();
        R.rightCols(A.cols()) = A.imag().cast<Cx>();
        return R;
      };
      for (auto& w : W) cs.W.push_back(realify_chain(w));
      for (auto& u : U) cs.U.push_back(realify_chain(u));
      if (std::abs(std::abs(rep) - 1.0) >= 1e-6) {
        // Off the unit circle the reciprocal partner carries its own
        // generators; snap 1/rep to the eigenvalue actually detected.
        Cx rep2 = 1.0 / rep;
        for (Cx m : cl.members)
          if (near_eig(m, 1.0 / rep)) {
            rep2 = m;
            break;
          }
        ChainOptions c2w = opts;
        ChainOptions c2u = opts;
        if (opts.mix_seed != 0) {
          c2w.mix_seed = opts.mix_seed + 2;
          c2u.mix_seed = opts.mix_seed + 3;
        }
        cs.rep2 = rep2;
        for (auto& w : chains_at(C, rep2, cl.sizes, c2w))
          cs.W2.push_back(realify_chain(w));
        for (auto& u : chains_at(Cinv, rep2, cl.sizes, c2u))
          cs.U2.push_back(realify_chain(u));
      }
    } else if (real_route) {
      // Real eigenvalue of a real problem: chains must be real after the
      // phase fix; enforce it loudly.
      for (auto* set : {&W, &U}) {
        for (auto& w : *set) {
          const double im = w.imag().cwiseAbs().maxCoeff();
          const double sc = w.cwiseAbs().maxCoeff();
          if (im > 1e-6 * std::max(1.0, sc))
            throw StructureError(
                "jordan_chains: expected real chains at eigenvalue " +
                cx_str(rep));
          w = w.real().cast<Cx>();
        }
      }
      cs.W = std::move(W);
      cs.U = std::move(U);
    } else {
      cs.W = std::move(W);
      cs.U = std::move(U);
    }
    out.push_back(std::move(cs));
  }
  return out;
}

ChainList eigen_chains(const CMat& C, const JordanSpec& spec,
                       const ChainOptions& opts) {
  ChainList out;
  for (const auto& e : spec.eigenvalues)
    out.push_back(chains_at(C, e.eigenvalue, e.sizes, opts));
  return out;
}

std::vector<CMat> centralizer_basis(const CMat& /*C*/, const JordanSpec& spec,
                                    const ChainList& Wch,
                                    const ChainList& Pch) {
  if (Wch.size() != spec.eigenvalues.size() || Pch.size() != Wch.size())
    throw std::invalid_argument("centralizer_basis: chain lists do not match spec");
  std::vector<CMat> out;
  for (std::size_t e = 0; e < spec.eigenvalues.size(); ++e) {
    for (std::size_t i = 0; i < Wch[e].size(); ++i) {
      const int ri = static_cast<int>(Wch[e][i].cols());
      for (std::size_t j = 0; j < Pch[e].size(); ++j) {
        const int rj = static_cast<int>(Pch[e][j].cols());
        for (int k = 1; k <= std::min(ri, rj); ++k)
          out.push_back(Wch[e][i] * backwards_identity(k, ri, rj) *
                        Pch[e][j].transpose());
      }
    }
  }
  return out;
}

std::vector<CMat> centralizer_basis(const CMat& C, const JordanSpec& spec,
                                    double tol) {
  ChainOptions opts;
  opts.tol = tol;
  return centralizer_basis(C, spec, eigen_chains(C, spec, opts),
                           eigen_chains(C.transpose(), spec, opts));
}

int centralizer_dimension(const JordanSpec& spec) {
  int dim = 0;
  for (const auto& e : spec.eigenvalues) {
    const auto& r = e.sizes;
    for (std::size_t j = 0; j < r.size(); ++j) {
      dim += r[j];
      for (std::size_t k = j + 1; k < r.size(); ++k)
        dim += std::min(2 * r[j], 2 * r[k]);
    }
  }
  return dim;
}

nlohmann::json jordan_spec_to_json(const JordanSpec& spec, Involution inv,
                                   Field field) {
  nlohmann::json eigs = nlohmann::json::array();
  for (const auto& e : spec.eigenvalues) {
    nlohmann::json je;
    je["eigenvalue"] = {e.eigenvalue.real(), e.eigenvalue.imag()};
    je["blocks"] = e.sizes;
    eigs.push_back(std::move(je));
  }
  nlohmann::json pairing = nlohmann::json::array();
  for (const auto& cl : pair_classes(spec, inv, field)) {
    nlohmann::json members = nlohmann::json::array();
    for (Cx m : cl.members) members.push_back({m.real(), m.imag()});
    pairing.push_back(std::move(members));
  }
  return {{"eigenvalues", std::move(eigs)}, {"pairing", std::move(pairing)}};
}

JordanSpec jordan_spec_from_json(const nlohmann::json& j) {
  JordanSpec spec;
  for (const auto& je : j.at("eigenvalues")) {
    EigBlocks e;
    e.eigenvalue = Cx(je.at("eigenvalue").at(0).get<double>(),
                      je.at("eigenvalue").at(1).get<double>());
    e.sizes = je.at("blocks").get<std::vector<int>>();
    spec.eigenvalues.push_back(std::move(e));
  }
  return spec;
}

}  // namespace autgrp::eigenstructure
