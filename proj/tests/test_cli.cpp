#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "autgrp/core_linalg.hpp"

#include <json.hpp>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using autgrp::core_linalg::Mat;
using autgrp::core_linalg::RMat;
using nlohmann::json;

namespace {

// Path of the built binary, injected by CMake through the test
// environment.
std::string cli() {
  const char* p = std::getenv("AUTGRP_CLI_PATH");
  REQUIRE_MESSAGE(p != nullptr, "AUTGRP_CLI_PATH not set");
  return p;
}

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "autgrp_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Run a raw shell command, capturing exit code and both streams.
RunResult run_raw(const std::string& command) {
  static int counter = 0;
  const auto out = scratch() / ("out" + std::to_string(counter));
  const auto err = scratch() / ("err" + std::to_string(counter));
  ++counter;
  const std::string cmd =
      command + " > " + out.string() + " 2> " + err.string();
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = rc < 0 ? 127 : WEXITSTATUS(rc);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

RunResult run_cli(const std::string& args) { return run_raw(cli() + " " + args); }

std::string write_matrix(const std::string& name, const RMat& m) {
  const auto path = scratch() / name;
  std::ofstream f(path);
  f << autgrp::core_linalg::mat_to_json(Mat::real(m)).dump(2) << "\n";
  return path.string();
}

std::string write_text(const std::string& name, const std::string& text) {
  const auto path = scratch() / name;
  std::ofstream f(path, std::ios::binary);
  f << text;
  return path.string();
}

// The known 4x4 with cosquare structure J_2^2 + J_2^(1/2).
RMat worked_j4() {
  RMat J(4, 4);
  J << 5, 6, -9, -9, 1, 0, -1, 1, -3, -6, 7, 7, -6, 2, 2, 0;
  return J;
}

}  // namespace

TEST_CASE("dim prints the bare count") {
  const auto in = write_matrix("I4.json", RMat::Identity(4, 4));
  const RunResult r = run_cli("dim --input " + in + " --involution T");
  CHECK(r.code == 0);
  CHECK(r.out == "6\n");

  // Full report as JSON: formula total, oracle nullity, agreement.
  const RunResult j = run_cli("dim --input " + in + " --format json");
  CHECK(j.code == 0);
  const json rep = json::parse(j.out);
  CHECK(rep.at("total") == 6);
  CHECK(rep.at("oracle_nullity") == 6);
  CHECK(rep.at("agrees") == true);

  // CSV input path: the symplectic 2x2 gives sp(2), dimension 3.
  const auto csv = write_text("omega.csv", "0,1\n-1,0\n");
  const RunResult c = run_cli("dim --input " + csv);
  CHECK(c.code == 0);
  CHECK(c.out == "3\n");
}

TEST_CASE("basis emits the solution space and verify round-trips it") {
  const auto in = write_matrix("J4.json", worked_j4());
  const auto bout = (scratch() / "b.json").string();

  const RunResult r =
      run_cli("basis --input " + in + " --output " + bout);
  REQUIRE(r.code == 0);
  const json b = json::parse(slurp(bout));
  CHECK(b.at("space") == "sol");
  CHECK(b.at("dim") == 2);
  CHECK(b.at("residual_max").get<double>() < 1e-8);
  CHECK(b.at("elements").size() == 2);

  const RunResult v =
      run_cli("verify --input " + in + " --basis " + bout);
  CHECK(v.code == 0);
  const json vr = json::parse(v.out);
  CHECK(vr.at("pass") == true);
  CHECK(vr.at("span_agrees") == true);
  CHECK(vr.at("dim") == 2);

  // Tampering with one stored entry must fail the re-check.
  json tampered = b;
  tampered["elements"][0]["data"][0][0] =
      tampered["elements"][0]["data"][0][0].get<double>() + 0.5;
  const auto tpath = write_text("tampered.json", tampered.dump());
  const RunResult t =
      run_cli("verify --input " + in + " --basis " + tpath);
  CHECK(t.code == 1);
  CHECK(json::parse(t.out).at("pass") == false);

  // The cosol space of the same matrix also has dimension 2.
  const RunResult c =
      run_cli("basis --input " + in + " --space cosol");
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out).at("space") == "cosol");
  CHECK(json::parse(c.out).at("dim") == 2);
}

TEST_CASE("structure reports the Kronecker blocks") {
  const auto in = write_matrix("J4s.json", worked_j4());
  const RunResult r = run_cli("structure --input " + in);
  REQUIRE(r.code == 0);
  const json s = json::parse(r.out);
  REQUIRE(s.at("blocks").size() == 1);
  CHECK(s.at("blocks")[0].at("kind") == "PairedJordan");
  CHECK(s.at("blocks")[0].at("copies") == 2);
}

TEST_CASE("classify covers the table row and the 4x4 profile") {
  const auto z = write_matrix("zero2.json", RMat::Zero(2, 2));
  const RunResult r = run_cli("classify --input " + z);
  REQUIRE(r.code == 0);
  const json c = json::parse(r.out);
  CHECK(c.at("case") == 9);
  CHECK(c.at("dimension") == 4);
  CHECK(c.at("group") == "GL(2, R)");

  RMat cc(4, 4);
  cc << 1, 0.5, 0, 0, -0.5, 1, 0, 0, 0, 0, 1, 1.3, 0, 0, -1.3, 1;
  const auto p = write_matrix("cc.json", cc);
  const RunResult q = run_cli("classify --input " + p);
  REQUIRE(q.code == 0);
  CHECK(json::parse(q.out).at("profile") == "circle x circle");

  const auto bad = write_matrix("I3.json", RMat::Identity(3, 3));
  CHECK(run_cli("classify --input " + bad).code == 3);
}

TEST_CASE("sample and project emit deterministic artifacts") {
  const auto in = write_matrix("J4p.json", worked_j4());

  const RunResult s =
      run_cli("sample --input " + in + " -N 16 --seed 3");
  REQUIRE(s.code == 0);
  CHECK(s.out.substr(0, s.out.find('\n')) ==
        "g11,g12,g13,g14,g21,g22,g23,g24,g31,g32,g33,g34,g41,g42,g43,g44");
  CHECK(std::count(s.out.begin(), s.out.end(), '\n') == 17);
  const RunResult s2 =
      run_cli("sample --input " + in + " -N 16 --seed 3");
  CHECK(s.out == s2.out);  // byte-identical reruns

  const RunResult p =
      run_cli("project --input " + in + " -N 10 --seed 3");
  REQUIRE(p.code == 0);
  CHECK(p.out.substr(0, 6) == "x,y,z\n");
  CHECK(std::count(p.out.begin(), p.out.end(), '\n') == 11);

  const RunResult ply = run_cli("project --input " + in +
                                " -N 10 --seed 3 --format ply");
  REQUIRE(ply.code == 0);
  CHECK(ply.out.find("element vertex 10") != std::string::npos);

  // Surface grid needs a two dimensional tangent space; the worked J
  // has one, the 3x3 identity does not.
  const auto gp = (scratch() / "plot.gp").string();
  const RunResult g = run_cli("project --input " + in +
                              " -N 25 --mode surface --gnuplot " + gp);
  REQUIRE(g.code == 0);
  CHECK(std::count(g.out.begin(), g.out.end(), '\n') == 26);
  CHECK(slurp(gp).find("splot") != std::string::npos);

  const auto i3 = write_matrix("I3p.json", RMat::Identity(3, 3));
  CHECK(run_cli("project --input " + i3 + " --mode surface").code == 3);
}

TEST_CASE("usage and input errors exit with code 3") {
  const auto in = write_matrix("I2.json", RMat::Identity(2, 2));
  CHECK(run_cli("").code == 3);
  CHECK(run_cli("frobnicate --input " + in).code == 3);
  CHECK(run_cli("basis").code == 3);  // missing --input
  CHECK(run_cli("basis --input /nonexistent.json").code == 3);
  CHECK(run_cli("basis --input " + in + " --tol 0").code == 3);
  CHECK(run_cli("basis --input " + in + " --tol -1").code == 3);
  CHECK(run_cli("basis --input " + in + " --format csv").code == 3);
  CHECK(run_cli("basis --input " + in + " --bogus 1").code == 3);
  CHECK(run_cli("verify --input " + in).code == 3);  // missing --basis

  const auto garbage = write_text("garbage.json", "{not json");
  CHECK(run_cli("basis --input " + garbage).code == 3);
  const auto ragged = write_text("ragged.csv", "1,2\n3\n");
  CHECK(run_cli("dim --input " + ragged).code == 3);

  // Error messages name the failing stage.
  const RunResult r = run_cli("basis --input /nonexistent.json");
  CHECK(r.err.find("read '/nonexistent.json'") != std::string::npos);

  CHECK(run_cli("--help").code == 3);  // help is not a subcommand
  CHECK(run_cli("basis --help").code == 0);
}

TEST_CASE("structure errors exit with code 2 and name the stage") {
  const auto in = write_matrix("J4t.json", worked_j4());
  // 0.05 sits inside a rank-decision gap of this pencil: the staircase
  // passes stop mirroring each other and the analysis refuses.
  const RunResult r = run_cli("structure --input " + in + " --tol 0.05");
  CHECK(r.code == 2);
  CHECK(r.err.find("structure analysis") != std::string::npos);
  CHECK(r.err.find("tolerance 0.05") != std::string::npos);

  // A cutoff above the data scale degrades to a consistent (if
  // degenerate) reading; it used to hang the staircase deflation.
  const RunResult h = run_cli("structure --input " + in + " --tol 0.5");
  CHECK(h.code == 0);
}

TEST_CASE("the tolerance environment override is honored") {
  const auto in = write_matrix("J4e.json", worked_j4());
  const auto bout = (scratch() / "be.json").string();
  REQUIRE(run_cli("basis --input " + in + " --output " + bout).code == 0);

  // Round-trip still passes at the looser tolerance from the env...
  const RunResult direct =
      run_raw("env AUTGRP_TOL=1e-6 " + cli() + " verify --input " + in +
              " --basis " + bout);
  CHECK(direct.code == 0);
  CHECK(json::parse(direct.out).at("tolerance") == 1e-6);

  // ...an explicit flag beats the environment...
  const RunResult flag =
      run_raw("env AUTGRP_TOL=1e-6 " + cli() + " verify --input " + in +
              " --basis " + bout + " --tol 1e-4");
  CHECK(flag.code == 0);
  CHECK(json::parse(flag.out).at("tolerance") == 1e-4);

  // ...and a malformed value is a usage error.
  CHECK(run_raw("env AUTGRP_TOL=abc " + cli() + " dim --input " + in).code ==
        3);
}
