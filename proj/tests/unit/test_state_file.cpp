#include "mgeof/errors.hpp"
#include "mgeof/state_file.hpp"
#include "mgeof/states.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace mgeof;

namespace {

constexpr const char* kThermal = R"(version 1
n_modes 1
ordering qqpp
# a comment
label thermal nbar=1

covariance
3 0
0, 3
displacement
0 +0
)";

}  // namespace

TEST_CASE("parse a hand-written file") {
  RawStateFile raw = parse_state_text(kThermal);
  CHECK(raw.version == 1);
  CHECK(raw.n_modes == 1);
  CHECK(raw.label == "thermal nbar=1");
  CHECK(raw.covariance(0, 0) == 3.0);
  CHECK(raw.covariance(1, 1) == 3.0);
  CHECK(raw.displacement.size() == 2);
  GaussianState s = raw.to_state();
  CHECK(s.cov(0, 0) == 3.0);
}

TEST_CASE("format number") {
  CHECK(format_number(3.0) == "3");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-0.5) == "-0.5");
  CHECK(std::stod(format_number(-2.5e-20)) == -2.5e-20);
}

TEST_CASE("round trip is exact") {
  GaussianState g = apply_symplectic(thermal_product({0.3, 1.1, 0.0}), three_mode_squeezer(0.77));
  const std::string once = serialize_state(g, "s3", "test");
  RawStateFile back = parse_state_text(once);
  CHECK((back.covariance - g.cov.matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.label == "s3");
  CHECK(back.provenance == "test");
  const std::string twice = serialize_state(back.to_state(), back.label, back.provenance);
  CHECK(once == twice);
}

TEST_CASE("file io") {
  const auto path = std::filesystem::temp_directory_path() / "mgeof_state_file_test.txt";
  write_state_file(path, ghzw(0.5), "ghzw");
  RawStateFile raw = read_state_file(path);
  CHECK(raw.n_modes == 3);
  CHECK((raw.covariance - ghzw(0.5).cov.matrix()).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_state_file(path), ParseError);
}

TEST_CASE("malformed input") {
  auto fails = [](std::string text) { CHECK_THROWS_AS(parse_state_text(text), ParseError); };
  std::string base = kThermal;
  auto replace = [&](std::string from, std::string to) {
    std::string s = base;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  fails(replace("ordering qqpp", "ordering qpqp"));
  fails(replace("version 1", "version 2"));
  fails(replace("0, 3", "0 x"));
  fails(replace("0, 3", "0"));
  fails(replace("0 +0", "0 0 0"));
  fails(replace("n_modes 1", "n_modes 0"));
  fails(replace("covariance\n3 0\n0, 3\n", ""));
  fails(replace("label", "colour"));

  try {
    parse_state_text(replace("0, 3", "0 x"));
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 9") != std::string::npos);
  }

  RawStateFile bare = parse_state_text(replace("displacement\n0 +0\n", ""));
  CHECK(bare.displacement.size() == 2);
  CHECK(bare.displacement.isZero(0.0));

  RawStateFile asym = parse_state_text(replace("0, 3", "0.5 3"));
  CHECK_THROWS_AS(asym.to_state(), ValidationError);
}
