#include "mgeof/cli.hpp"
#include "mgeof/errors.hpp"
#include "mgeof/state_file.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using mgeof::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  TempDir() : path(fs::temp_directory_path() / "mgeof_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  fs::path path;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("gen and measure") {
  TempDir dir;
  CHECK(call({"gen", "thermal", "--nbar", "1", "--out", dir.file("t.txt")}).code == 0);
  auto raw = mgeof::read_state_file(dir.file("t.txt"));
  CHECK(raw.covariance(0, 0) == 3.0);
  CHECK(call({"measure", "entropy", dir.file("t.txt")}).out == "2\n");

  CHECK(call({"gen", "ghzw", "--r3", "0.5", "--out", dir.file("g.txt")}).code == 0);
  Outcome neoe = call({"measure", "neoe", dir.file("g.txt")});
  CHECK(neoe.code == 0);
  CHECK(neoe.out.rfind("1.34055605978", 0) == 0);

  CHECK(call({"gen", "s3", "--r3", "0.5", "--nbar", "0,0,0", "--out", dir.file("s.txt")}).code == 0);
  CHECK((mgeof::read_state_file(dir.file("s.txt")).covariance - mgeof::read_state_file(dir.file("g.txt")).covariance)
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  Outcome coarse = call({"measure", "alpha-entropy", dir.file("g.txt"), "--partition", "1|23"});
  Outcome fine = call({"measure", "alpha-entropy", dir.file("g.txt"), "--partition", "1|2|3"});
  CHECK(std::stod(coarse.out) <= std::stod(fine.out));

  CHECK(call({"gen", "vacuum", "--modes", "3", "--out", dir.file("v.txt")}).code == 0);
  Outcome g = call({"measure", "geof", dir.file("v.txt"), "--partition", "1|2|3"});
  CHECK(g.code == 0);
  CHECK(g.out.rfind("0 residual=", 0) == 0);

  Outcome nats = call({"measure", "entropy", dir.file("t.txt"), "--nats"});
  CHECK(std::stod(nats.out) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("gen writes to stdout") {
  Outcome o = call({"gen", "vacuum", "--modes", "1"});
  CHECK(o.code == 0);
  CHECK(mgeof::parse_state_text(o.out).n_modes == 1);
}

TEST_CASE("exit codes") {
  TempDir dir;
  call({"gen", "s3", "--r3", "0.5", "--nbar", "1,0,0", "--out", dir.file("mixed.txt")});
  Outcome mixed = call({"measure", "eoe", dir.file("mixed.txt")});
  CHECK(mixed.code == 2);
  CHECK(mixed.err.find("measure requires a pure state") != std::string::npos);

  spill(dir.file("bad.txt"), "version 1\nn_modes 1\nordering qqpp\ncovariance\n0.5 0\n0 0.5\ndisplacement\n0 0\n");
  CHECK(call({"measure", "entropy", dir.file("bad.txt")}).code == 3);
  CHECK(call({"verify", dir.file("bad.txt")}).code == 3);

  spill(dir.file("junk.txt"), "version 1\nn_modes one\n");
  CHECK(call({"verify", dir.file("junk.txt")}).code == 4);
  CHECK(call({"measure", "entropy", dir.file("missing.txt")}).code == 4);

  spill(dir.file("asym.txt"), "version 1\nn_modes 1\nordering qqpp\ncovariance\n2 1\n0 2\ndisplacement\n0 0\n");
  CHECK(call({"verify", dir.file("asym.txt")}).code == 4);

  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({"measure", "entropy"}).code == 1);
  CHECK(call({"--help"}).code == 0);

  call({"gen", "tms", "--r", "0.5", "--out", dir.file("two.txt")});
  CHECK(call({"standard-form", dir.file("two.txt")}).code == 2);

  call({"gen", "vacuum", "--modes", "4", "--out", dir.file("four.txt")});
  CHECK(call({"measure", "geof", dir.file("four.txt")}).code == 0);
  call({"gen", "s3", "--r3", "0.2", "--nbar", "1,0,0", "--out", dir.file("three.txt")});
  CHECK(call({"measure", "geof", dir.file("three.txt"), "--partition", "1|2"}).code == 1);
}

TEST_CASE("verify report") {
  TempDir dir;
  call({"gen", "vacuum", "--modes", "2", "--out", dir.file("v.txt")});
  Outcome v = call({"verify", dir.file("v.txt")});
  CHECK(v.code == 0);
  CHECK(v.out.find("pure: yes") != std::string::npos);
  CHECK(v.out.find("q-p: yes") != std::string::npos);

  call({"gen", "s3", "--r3", "0.5", "--nbar", "1,1,1", "--out", dir.file("s.txt")});
  Outcome s = call({"verify", dir.file("s.txt")});
  CHECK(s.code == 0);
  CHECK(s.out.find("pure: no") != std::string::npos);
  CHECK(s.out.find("q-p: yes") != std::string::npos);
}

TEST_CASE("round trip after one normalization") {
  TempDir dir;
  spill(dir.file("hand.txt"),
        "version 1\nn_modes 1\nordering qqpp\ncovariance\n+3.0000 0.1\n0.1, 3e0\ndisplacement\n0.10 0\n");
  CHECK(call({"standard-form", dir.file("hand.txt")}).code == 2);
  // verify leaves the file untouched; normalization is serialize(parse(.)).
  const std::string once = mgeof::serialize_state(mgeof::read_state_file(dir.file("hand.txt")).to_state());
  spill(dir.file("n1.txt"), once);
  const std::string twice = mgeof::serialize_state(mgeof::read_state_file(dir.file("n1.txt")).to_state());
  CHECK(once == twice);
}

TEST_CASE("standard form command") {
  TempDir dir;
  call({"gen", "ghzw", "--r3", "0.5", "--out", dir.file("g.txt")});
  Outcome o = call({"standard-form", dir.file("g.txt"), "--out", dir.file("sf.txt")});
  CHECK(o.code == 0);
  CHECK(o.out.find("zero-pattern defect") != std::string::npos);
  auto raw = mgeof::read_state_file(dir.file("sf.txt"));
  CHECK(raw.covariance(0, 0) == doctest::Approx(raw.covariance(3, 3)));
}

TEST_CASE("sweep is deterministic") {
  TempDir dir;
  const std::vector<std::string> args = {"sweep", "--scenario", "one_thermal", "--r3", "0.5", "--nbars", "0,1",
                                         "--restarts", "2", "--max-evals", "2000", "--seed", "7"};
  auto a = args;
  a.insert(a.end(), {"--out", dir.file("a.csv")});
  auto b = args;
  b.insert(b.end(), {"--out", dir.file("b.csv")});
  REQUIRE(call(a).code == 0);
  REQUIRE(call(b).code == 0);
  const std::string csv = slurp(dir.file("a.csv"));
  CHECK(csv == slurp(dir.file("b.csv")));
  CHECK(csv.rfind("nbar,geof_bits,residual,evals,converged\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("error mapping") {
  auto code = [](auto e) {
    std::ostringstream err;
    return mgeof::cli::report_error(std::make_exception_ptr(e), err);
  };
  CHECK(code(mgeof::ParseError("x")) == 4);
  CHECK(code(mgeof::ValidationError("x")) == 4);
  CHECK(code(mgeof::UnphysicalStateError("x", 0.5)) == 3);
  CHECK(code(mgeof::UnsupportedSizeError("x")) == 2);
  CHECK(code(mgeof::DomainError("x")) == 2);
  CHECK(code(mgeof::OptimizationFailure("x", -1.0)) == 5);
  CHECK(code(mgeof::NumericalError("x")) == 5);
  CHECK(code(std::invalid_argument("x")) == 1);
}
