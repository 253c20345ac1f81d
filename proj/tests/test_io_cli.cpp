#include "doctest.h"
#include "test_support.hpp"

#include "fmchain/cli.hpp"
#include "fmchain/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace fmc;
using fmc::io::Json;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path root;
  explicit Sandbox(const std::string& name) : root(fs::temp_directory_path() / ("fmchain_" + name)) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Sandbox() { fs::remove_all(root); }

  std::string write(const std::string& name, const Json& j) const {
    const auto p = root / name;
    std::ofstream(p) << j.dump();
    return p.string();
  }
  std::string out(const std::string& name = "out") const { return (root / name).string(); }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "fmchain");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long count_lines(const fs::path& p) {
  std::ifstream in(p);
  long n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("json round trips") {
  CHECK(io::complex_from_json(Json(0.5), "x") == Complex(0.5, 0.0));
  CHECK(io::complex_from_json(Json::array({0.5, -1.0}), "x") == Complex(0.5, -1.0));
  CHECK_THROWS_AS(io::complex_from_json(Json("a"), "x"), ValidationError);

  fmc::testing::Gen gen(1);
  const CMatrix m = gen.gaussian(3, 2);
  CHECK(io::complex_matrix_from_json(io::to_json(m), "m") == m);
  CHECK_THROWS_AS(io::complex_matrix_from_json(Json::parse("[[1, 2], [3]]"), "m"), ValidationError);
  CHECK_THROWS_AS(io::hermitian_matrix_from_json(Json::parse("[[1, 2], [3, 1]]"), "m"), ValidationError);
  const RealMatrix r = RealMatrix::Random(2, 3);
  CHECK(io::real_matrix_from_json(io::to_json(r), "r") == r);

  CHECK(io::format_real(0.1) == "0.1");
  CHECK(io::format_real(std::nan("")) == "nan");

  const auto doc = io::chain_document_from_json(Json::parse(R"({"A": [[0.5]], "B": [[0.5]], "strategy": {"boundary_angle": 1.5}})"));
  CHECK(std::holds_alternative<quasifree::BoundaryAngle>(doc.strategy));
  const auto exp = io::chain_document_from_json(Json::parse(R"({"A": [[0.5]], "B": [[0.5]], "X": [[[-0.25, 0]]]})"));
  CHECK(std::holds_alternative<quasifree::Explicit>(exp.strategy));
  CHECK_THROWS_AS(io::chain_document_from_json(Json::parse(R"({"A": [[0.5]]})")), ValidationError);
  CHECK_THROWS_AS(io::chain_document_from_json(Json::parse(R"({"A": [[0.5]], "B": [[0.5]], "strategy": "none"})")),
                  ValidationError);
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code_for(ErrorKind::validation) == 2);
  CHECK(cli::exit_code_for(ErrorKind::resource) == 2);
  CHECK(cli::exit_code_for(ErrorKind::infeasible) == 3);
  CHECK(cli::exit_code_for(ErrorKind::convergence) == 4);
  CHECK(cli::exit_code_for(ErrorKind::numeric) == 4);
}

TEST_CASE("classical command") {
  Sandbox box("classical");
  const auto input = box.write("p.json", Json{{"P", {{0.75, 0.25}, {0.25, 0.75}}}});
  const auto r = run({"classical", "--input", input, "--out", box.out(), "--steps", "20000"});
  REQUIRE(r.code == 0);
  const Real rate = std::stod(slurp(box.root / "out" / "rate.txt"));
  CHECK(std::abs(rate - 0.562335) < 1e-6);
  const Json summary = Json::parse(slurp(box.root / "out" / "classical.json"));
  CHECK(summary["increments"].size() == 14);
  CHECK(std::abs(summary["increment_estimate"].get<Real>() - 0.562335) < 1e-6);
  CHECK(count_lines(box.root / "out" / "increments.csv") == 15);
  CHECK(count_lines(box.root / "out" / "marginal.csv") == 1 + 1024);

  const auto bits = run({"classical", "--input", input, "--out", box.out("bits"), "--n", "3", "--steps", "100",
                         "--bits"});
  REQUIRE(bits.code == 0);
  CHECK(std::abs(std::stod(slurp(box.root / "bits" / "rate.txt")) - rate / std::numbers::ln2) < 1e-12);

  const auto id = box.write("id.json", Json{{"P", {{1.0, 0.0}, {0.0, 1.0}}}});
  REQUIRE(run({"classical", "--input", id, "--out", box.out("id"), "--steps", "100"}).code == 0);
  CHECK(std::stod(slurp(box.root / "id" / "rate.txt")) == 0.0);

  const auto bad = box.write("bad.json", Json{{"P", {{0.5, 0.6}, {0.5, 0.5}}}});
  const auto e = run({"classical", "--input", bad, "--out", box.out("bad")});
  CHECK(e.code == 2);
  const Json err = Json::parse(e.err);
  CHECK(err["error"]["code"] == "not_stochastic");
  CHECK(err["error"]["kind"] == "validation");
}

TEST_CASE("fermi command") {
  Sandbox box("fermi");
  const auto input = box.write("c.json", Json::parse(R"({"A": [[0.5]], "B": [[0.5]], "X": [[-0.25]]})"));
  const auto r = run({"fermi", "--input", input, "--out", box.out()});
  REQUIRE(r.code == 0);
  const Json s = Json::parse(slurp(box.root / "out" / "fermi.json"));
  CHECK(s["extendible"] == true);
  CHECK(s["gaps"]["increment_szego"].get<Real>() <= 1e-3);
  CHECK(fs::exists(box.root / "out" / "chain.json"));

  const auto product = box.write("p.json", Json::parse(R"({"A": [[0.5]], "B": [[0.5]], "strategy": "product"})"));
  REQUIRE(run({"fermi", "--input", product, "--out", box.out("p"), "--n", "16", "--quad", "256"}).code == 0);
  const Json ps = Json::parse(slurp(box.root / "p" / "fermi.json"));
  for (const char* k : {"average", "increment", "szego"})
    CHECK(std::abs(ps["densities"][k].get<Real>() - 0.636514) < 1e-6);

  const auto bad = box.write("bad.json", Json::parse(R"({"A": [[0.8]], "B": [[0.2]]})"));
  const auto e = run({"fermi", "--input", bad, "--out", box.out("bad")});
  CHECK(e.code == 3);
  CHECK(Json::parse(e.err)["error"]["code"] == "not_extendible");

  const auto not_cp = box.write("ncp.json", Json::parse(R"({"A": [[0.8]], "B": [[0.5]]})"));
  CHECK(run({"fermi", "--input", not_cp, "--out", box.out("ncp")}).code == 2);
  CHECK(run({"fermi", "--input", (box.root / "missing.json").string()}).code == 2);
  CHECK(run({"fermi"}).code == 2);
  CHECK(run({}).code == 2);
}

TEST_CASE("scan commands") {
  Sandbox box("scan");
  const auto input = box.write("s.json", Json{{"a", 0.5}, {"b", 0.5}});
  REQUIRE(run({"scan", "--input", input, "--out", box.out(), "--grid", "11", "--quad", "64"}).code == 0);
  CHECK(count_lines(box.root / "out" / "scan.csv") == 1 + 121);
  const Json s = Json::parse(slurp(box.root / "out" / "scan_summary.json"));
  CHECK(s["within_one_cell"] == true);

  const auto empty = box.write("e.json", Json{{"a", 0.8}, {"b", 0.3}});
  REQUIRE(run({"scan", "--input", empty, "--out", box.out("e"), "--grid", "5"}).code == 0);
  const std::string csv = slurp(box.root / "e" / "scan.csv");
  CHECK(csv.find("true") == std::string::npos);
  CHECK(count_lines(box.root / "e" / "scan.csv") == 26);

  const auto chain = box.write("c.json", Json::parse(R"({"A": [[0.5]], "B": [[0.5]], "strategy": "product"})"));
  REQUIRE(run({"scan", "spectrum", "--input", chain, "--out", box.out("sp"), "--n", "8"}).code == 0);
  std::ifstream hist(box.root / "sp" / "histogram.csv");
  std::string line;
  std::getline(hist, line);
  CHECK(line == "bin_lo,bin_hi,finite,limit");
  long nonzero = 0;
  while (std::getline(hist, line)) {
    std::stringstream ss(line);
    std::string lo, hi, fin, lim;
    std::getline(ss, lo, ',');
    std::getline(ss, hi, ',');
    std::getline(ss, fin, ',');
    std::getline(ss, lim, ',');
    if (std::stod(fin) > 0 || std::stod(lim) > 0) {
      ++nonzero;
      CHECK(std::stod(lo) <= 2.0 / 3.0);
      CHECK(std::stod(hi) >= 2.0 / 3.0);
      CHECK(std::stod(fin) == doctest::Approx(1.0));
      CHECK(std::stod(lim) == doctest::Approx(1.0));
    }
  }
  CHECK(nonzero == 1);
  CHECK(count_lines(box.root / "sp" / "eigenvalues.csv") == 9);
  CHECK(run({"scan"}).code == 2);
}
