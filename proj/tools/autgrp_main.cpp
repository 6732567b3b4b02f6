// autgrp: command-line front end over the library modules.
//
//   autgrp <subcommand> --input J.json [options]
//
// Subcommands: basis, dim, structure, classify, sample, project, verify.
// Exit codes: 0 success, 1 failed verification, 2 structure/singularity
// errors, 3 input or usage errors.

#include "autgrp/group_sampler.hpp"
#include "autgrp/pencil_kronecker.hpp"
#include "autgrp/solution_basis.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace autgrp;
using core_linalg::CMat;
using core_linalg::Field;
using core_linalg::Involution;
using core_linalg::Mat;
using core_linalg::SingularInput;
using core_linalg::StructureError;
using nlohmann::json;

namespace {

constexpr double kDefaultTol = 1e-8;

struct Options {
  std::string subcommand;
  std::string input;       // matrix file, JSON schema or CSV of reals
  std::string basis_file;  // verify: stored basis JSON
  Involution inv = Involution::T;
  int sign = +1;           // +1 sol, -1 cosol (--space)
  double tol = -1.0;       // < 0: default (AUTGRP_TOL overrides)
  std::uint64_t seed = 0;
  int N = 1000;
  double scale = 1.0;
  std::string output;      // empty: stdout
  std::string format;      // empty: subcommand default
  std::string mode = "scatter";
  std::string gnuplot;     // optional: write a plot script here
};

void usage(std::ostream& os) {
  os << "usage: autgrp <subcommand> --input <matrix> [options]\n"
        "\n"
        "subcommands\n"
        "  basis      solution basis of X*J + JX = 0 (or - with --space cosol)\n"
        "  dim        closed-form dimension count (prints the number)\n"
        "  structure  Kronecker block structure of the pencil (J, J*)\n"
        "  classify   2x2: nine-case table row; 4x4: generic profile\n"
        "  sample     draw N group elements exp(sum r_j S_j)\n"
        "  project    3-D projection of a sample cloud\n"
        "  verify     re-check a stored basis file against J\n"
        "\n"
        "options\n"
        "  --input <path>       matrix, JSON schema or .csv of reals (required)\n"
        "  --involution T|H     transpose or conjugate transpose (default T)\n"
        "  --space sol|cosol    which solution space (default sol)\n"
        "  --tol <x>            tolerance, > 0 (default 1e-8; env AUTGRP_TOL)\n"
        "  --seed <u64>         RNG seed for sample/project (default 0)\n"
        "  -N, --samples <n>    sample count (default 1000)\n"
        "  --scale <x>          coefficient range [-scale, scale] (default 1)\n"
        "  --output <path>      write to file instead of stdout\n"
        "  --format json|csv|ply  output format (default: json; sample csv;\n"
        "                         project csv)\n"
        "  --mode scatter|surface  projection mode (default scatter; surface\n"
        "                          lays a g x g grid, g = round(sqrt(N)))\n"
        "  --gnuplot <path>     project: also write a gnuplot script\n"
        "  --basis <path>       verify: the stored basis JSON (required)\n"
        "\n"
        "verify exits 0 when the stored basis still matches J (residuals and\n"
        "span against the brute-force nullspace), 1 when it does not.\n";
}

[[noreturn]] void fail_arg(const std::string& what) {
  throw std::invalid_argument(what);
}

double parse_double(const std::string& flag, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) fail_arg(flag + ": trailing characters in '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail_arg(flag + ": expected a number, got '" + s + "'");
  } catch (const std::out_of_range&) {
    fail_arg(flag + ": out of range: '" + s + "'");
  }
}

long long parse_int(const std::string& flag, const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    fail_arg(flag + ": expected an integer, got '" + s + "'");
  return v;
}

Options parse_args(int argc, char** argv) {
  Options o;
  if (argc < 2) fail_arg("missing subcommand");
  o.subcommand = argv[1];
  const std::vector<std::string> subs = {"basis",    "dim",    "structure",
                                         "classify", "sample", "project",
                                         "verify"};
  if (std::find(subs.begin(), subs.end(), o.subcommand) == subs.end())
    fail_arg("unknown subcommand '" + o.subcommand + "'");

  // The environment default is overridden by an explicit --tol.
  if (const char* env = std::getenv("AUTGRP_TOL")) {
    o.tol = parse_double("AUTGRP_TOL", env);
    if (o.tol <= 0) fail_arg("AUTGRP_TOL: tolerance must be > 0");
  }

  auto need = [&](int& i) -> std::string {
    if (i + 1 >= argc) fail_arg(std::string(argv[i]) + ": missing value");
    return argv[++i];
  };
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--input") {
      o.input = need(i);
    } else if (a == "--involution") {
      o.inv = core_linalg::parse_involution(need(i));
    } else if (a == "--space") {
      const std::string s = need(i);
      if (s == "sol") o.sign = +1;
      else if (s == "cosol") o.sign = -1;
      else fail_arg("--space: expected sol or cosol, got '" + s + "'");
    } else if (a == "--tol") {
      o.tol = parse_double(a, need(i));
      if (o.tol <= 0) fail_arg("--tol: tolerance must be > 0");
    } else if (a == "--seed") {
      o.seed = static_cast<std::uint64_t>(parse_int(a, need(i)));
    } else if (a == "-N" || a == "--samples") {
      const long long n = parse_int(a, need(i));
      if (n < 0) fail_arg("-N: sample count must be >= 0");
      o.N = static_cast<int>(n);
    } else if (a == "--scale") {
      o.scale = parse_double(a, need(i));
    } else if (a == "--output") {
      o.output = need(i);
    } else if (a == "--format") {
      o.format = need(i);
      if (o.format != "json" && o.format != "csv" && o.format != "ply")
        fail_arg("--format: expected json, csv or ply, got '" + o.format + "'");
    } else if (a == "--mode") {
      o.mode = need(i);
      if (o.mode != "scatter" && o.mode != "surface")
        fail_arg("--mode: expected scatter or surface, got '" + o.mode + "'");
    } else if (a == "--gnuplot") {
      o.gnuplot = need(i);
    } else if (a == "--basis") {
      o.basis_file = need(i);
    } else if (a == "--help" || a == "-h") {
      usage(std::cout);
      std::exit(0);
    } else {
      fail_arg("unknown option '" + a + "'");
    }
  }
  if (o.input.empty()) fail_arg(o.subcommand + ": --input is required");
  if (o.subcommand == "verify" && o.basis_file.empty())
    fail_arg("verify: --basis is required");
  return o;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_arg("read '" + path + "': cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Plain CSV of reals: one row per line, comma separated, no header.
Mat matrix_from_csv(const std::string& path, const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ','))
      row.push_back(parse_double("parse '" + path + "'", cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail_arg("parse '" + path + "': no rows");
  const std::size_t w = rows[0].size();
  core_linalg::RMat m(static_cast<int>(rows.size()), static_cast<int>(w));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != w)
      fail_arg("parse '" + path + "': ragged row " + std::to_string(i + 1));
    for (std::size_t j = 0; j < w; ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return Mat::real(m);
}

json parse_json(const std::string& path, const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail_arg("parse '" + path + "': " + e.what());
  }
}

Mat load_matrix(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    return matrix_from_csv(path, text);
  try {
    return core_linalg::mat_from_json(parse_json(path, text));
  } catch (const json::exception& e) {
    fail_arg("parse '" + path + "': " + e.what());
  }
}

void write_output(const Options& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) fail_arg("write '" + o.output + "': cannot open file");
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Default output format per subcommand, validated against the request.
std::string pick_format(const Options& o,
                        const std::vector<std::string>& allowed) {
  const std::string f = o.format.empty() ? allowed.front() : o.format;
  if (std::find(allowed.begin(), allowed.end(), f) == allowed.end())
    fail_arg(o.subcommand + ": --format " + f + " is not supported here");
  return f;
}

int run_basis(const Options& o, const Mat& J) {
  solution_basis::BasisOptions opts;
  opts.tol = o.tol;
  const auto b = solution_basis::basis_of(J, o.inv, o.sign, opts);
  pick_format(o, {"json"});
  write_output(o, dump(solution_basis::solution_basis_to_json(b)));
  return 0;
}

int run_dim(const Options& o, const Mat& J) {
  const auto spec = pencil_kronecker::kronecker_structure(J, o.inv, o.tol);
  const auto rep = solution_basis::dim_from_structure(spec, o.sign, J);
  pick_format(o, {"json"});
  if (o.format.empty())  // bare number by default, full report as JSON
    write_output(o, std::to_string(rep.total) + "\n");
  else
    write_output(o, dump(solution_basis::dim_report_to_json(rep)));
  return 0;
}

int run_structure(const Options& o, const Mat& J) {
  const auto spec = pencil_kronecker::kronecker_structure(J, o.inv, o.tol);
  pick_format(o, {"json"});
  write_output(o, dump(pencil_kronecker::kronecker_spec_to_json(spec)));
  return 0;
}

int run_classify(const Options& o, const Mat& J) {
  pick_format(o, {"json"});
  if (J.rows() == 2 && J.cols() == 2) {
    const auto c = group_sampler::classify_2x2(J);
    write_output(o, dump(json{{"case", c.case_id},
                              {"signature", {c.sig_pos, c.sig_neg}},
                              {"rank_skew", c.rank_skew},
                              {"cosquare", c.cosquare_tag},
                              {"group", c.group},
                              {"dimension", c.dimension}}));
    return 0;
  }
  if (J.rows() == 4 && J.cols() == 4) {
    const auto p = group_sampler::profile_4x4(J);
    write_output(o, dump(json{{"profile", group_sampler::profile_name(p)}}));
    return 0;
  }
  fail_arg("classify: needs a real 2x2 or 4x4 matrix, got " +
           std::to_string(J.rows()) + "x" + std::to_string(J.cols()));
}

group_sampler::SampleConfig sample_config(const Options& o) {
  group_sampler::SampleConfig cfg;
  cfg.N = o.N;
  cfg.seed = o.seed;
  cfg.scale = o.scale;
  return cfg;
}

int run_sample(const Options& o, const Mat& J) {
  const auto gs = group_sampler::sample_group(J, o.inv, sample_config(o));
  const std::string f = pick_format(o, {"csv", "json"});
  if (f == "csv") {
    write_output(o, group_sampler::samples_to_csv(
                        gs, J.field == Field::Complex));
  } else {
    json arr = json::array();
    for (const CMat& G : gs)
      arr.push_back(core_linalg::mat_to_json(
          J.field == Field::Real ? Mat::real(G.real()) : Mat::complex(G)));
    write_output(o, dump(json{{"samples", arr}}));
  }
  return 0;
}

int run_project(const Options& o, const Mat& J) {
  const auto mode = o.mode == "surface" ? group_sampler::ProjectMode::SurfaceGrid
                                        : group_sampler::ProjectMode::Scatter;
  const auto pts = group_sampler::project_cloud(J, o.inv, sample_config(o), mode);
  const std::string f = pick_format(o, {"csv", "ply", "json"});
  if (f == "csv") {
    write_output(o, group_sampler::cloud_to_csv(pts));
  } else if (f == "ply") {
    write_output(o, group_sampler::cloud_to_ply(pts));
  } else {
    json arr = json::array();
    for (int i = 0; i < pts.rows(); ++i)
      arr.push_back({pts(i, 0), pts(i, 1), pts(i, 2)});
    write_output(o, dump(json{{"points", arr}}));
  }
  if (!o.gnuplot.empty()) {
    const std::string csv = o.output.empty() ? "cloud.csv" : o.output;
    std::ofstream out(o.gnuplot, std::ios::binary);
    if (!out) fail_arg("write '" + o.gnuplot + "': cannot open file");
    out << group_sampler::gnuplot_script(csv, mode);
  }
  return 0;
}

int run_verify(const Options& o, const Mat& J) {
  pick_format(o, {"json"});
  const json bj = parse_json(o.basis_file, read_file(o.basis_file));
  solution_basis::SolutionBasis stored;
  try {
    const std::string space = bj.at("space").get<std::string>();
    if (space == "sol") stored.sign = +1;
    else if (space == "cosol") stored.sign = -1;
    else fail_arg("verify '" + o.basis_file + "': unknown space '" + space + "'");
    stored.inv =
        core_linalg::parse_involution(bj.at("involution").get<std::string>());
    stored.field = core_linalg::parse_field(bj.at("field").get<std::string>());
    stored.real_space =
        stored.inv == Involution::H || stored.field == Field::Real;
    for (const json& e : bj.at("elements"))
      stored.elements.push_back(core_linalg::mat_from_json(e).a);
  } catch (const json::exception& e) {
    fail_arg("verify '" + o.basis_file + "': " + e.what());
  }

  const double tol = o.tol > 0 ? o.tol : kDefaultTol;
  double rmax = 0.0;
  for (const CMat& X : stored.elements) {
    if (X.rows() != J.rows() || X.cols() != J.cols())
      fail_arg("verify: element shape does not match the matrix");
    rmax = std::max(rmax, (core_linalg::adj(X, stored.inv) * J.a +
                           double(stored.sign) * J.a * X)
                              .norm());
  }
  const double rel = rmax / (1.0 + J.a.norm());
  const auto oracle = solution_basis::oracle_basis(J, stored.inv, stored.sign);
  const bool span = solution_basis::span_equal(stored, oracle, tol);
  const bool pass = span && rel <= tol;
  write_output(o, dump(json{{"dim", stored.dim()},
                            {"oracle_dim", oracle.dim()},
                            {"max_residual", rmax},
                            {"relative_residual", rel},
                            {"span_agrees", span},
                            {"tolerance", tol},
                            {"pass", pass}}));
  return pass ? 0 : 1;
}

int run(const Options& o) {
  const Mat J = load_matrix(o.input);
  if (o.subcommand == "basis") return run_basis(o, J);
  if (o.subcommand == "dim") return run_dim(o, J);
  if (o.subcommand == "structure") return run_structure(o, J);
  if (o.subcommand == "classify") return run_classify(o, J);
  if (o.subcommand == "sample") return run_sample(o, J);
  if (o.subcommand == "project") return run_project(o, J);
  return run_verify(o, J);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  try {
    o = parse_args(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "autgrp: arguments: " << e.what() << "\n\n";
    usage(std::cerr);
    return 3;
  }
  const double tol_shown = o.tol > 0 ? o.tol : kDefaultTol;
  try {
    return run(o);
  } catch (const SingularInput& e) {
    std::cerr << "autgrp " << o.subcommand << ": singular input: " << e.what()
              << " (tolerance " << tol_shown << ")\n";
    return 2;
  } catch (const StructureError& e) {
    std::cerr << "autgrp " << o.subcommand << ": structure analysis: "
              << e.what() << " (tolerance " << tol_shown << ")\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "autgrp " << o.subcommand << ": " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "autgrp " << o.subcommand << ": " << e.what()
              << " (tolerance " << tol_shown << ")\n";
    return 3;
  }
}
