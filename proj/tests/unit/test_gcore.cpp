#include "mgeof/errors.hpp"
#include "mgeof/gcore.hpp"
#include "mgeof/states.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace mgeof;
using Eigen::MatrixXd;

namespace {

MatrixXd diag(std::initializer_list<double> d) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  int i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Random symplectic as a product of local operations and two-mode squeezers.
SymplecticMatrix random_symplectic(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> sq(-0.6, 0.6);
  std::vector<ModeGluo> m(n);
  for (auto& g : m) g = {phase(rng), sq(rng), phase(rng)};
  MatrixXd s = gluo(GluoParams(m)).matrix();
  for (int a = 0; a + 1 < n; ++a) {
    MatrixXd t = MatrixXd::Identity(2 * n, 2 * n);
    MatrixXd tms = two_mode_squeezer(sq(rng)).matrix();
    const int idx[4] = {a, a + 1, a + n, a + 1 + n};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) t(idx[i], idx[j]) = tms(i, j);
    for (auto& g : m) g = {phase(rng), sq(rng), phase(rng)};
    s = gluo(GluoParams(m)).matrix() * t * s;
  }
  return SymplecticMatrix(s);
}

}  // namespace

TEST_CASE("symplectic form") {
  MatrixXd om = symplectic_form(2);
  CHECK(om(0, 2) == 1.0);
  CHECK(om(2, 0) == -1.0);
  CHECK(max_abs(om * om + MatrixXd::Identity(4, 4)) == 0.0);
}

TEST_CASE("covariance validation") {
  CHECK_THROWS_AS(CovarianceMatrix(MatrixXd::Identity(3, 3)), ValidationError);
  CHECK_THROWS_AS(CovarianceMatrix(MatrixXd::Identity(2, 4)), ValidationError);
  MatrixXd a = MatrixXd::Identity(2, 2);
  a(0, 1) = 0.1;
  CHECK_THROWS_AS(CovarianceMatrix{a}, ValidationError);
  a(1, 0) = 0.1 + 1e-15;
  CovarianceMatrix c(a);
  CHECK(c(0, 1) == c(1, 0));
}

TEST_CASE("symplectic eigenvalues") {
  auto v = symplectic_eigenvalues(CovarianceMatrix::vacuum(3));
  REQUIRE(v.size() == 3);
  for (double x : v) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));

  auto t = symplectic_eigenvalues(CovarianceMatrix(3.0 * MatrixXd::Identity(2, 2)));
  CHECK(t[0] == doctest::Approx(3.0).epsilon(1e-12));

  for (double x : symplectic_eigenvalues(ghzw(0.5).cov)) CHECK(std::abs(x - 1.0) < 1e-9);

  auto d = symplectic_eigenvalues(CovarianceMatrix(diag({5, 2, 5, 2})));
  CHECK(d[0] == doctest::Approx(5.0));
  CHECK(d[1] == doctest::Approx(2.0));
}

TEST_CASE("physicality") {
  CHECK(validate_physical(CovarianceMatrix::vacuum(2)).physical);
  auto bad = validate_physical(CovarianceMatrix(0.5 * MatrixXd::Identity(2, 2)));
  CHECK_FALSE(bad.physical);
  CHECK(bad.worst_nu == doctest::Approx(0.5));
  CHECK(validate_physical(ghzw(1.0).cov).physical);
  CHECK(is_pure(ghzw(1.0).cov));
  CHECK_FALSE(is_pure(thermal(0.5).cov));
}

TEST_CASE("partial trace and direct sum") {
  const double r = 0.4;
  GaussianState t = apply_symplectic(vacuum(2), two_mode_squeezer(r));
  std::vector<int> keep = {1};
  CovarianceMatrix red = partial_trace(t.cov, keep);
  CHECK(max_abs(red.matrix() - std::cosh(2 * r) * MatrixXd::Identity(2, 2)) < 1e-12);

  GaussianState th = thermal(1.0);
  CovarianceMatrix sum = direct_sum(th.cov, CovarianceMatrix::vacuum(1));
  CHECK(max_abs(sum.matrix() - diag({3, 1, 3, 1})) == 0.0);
  CHECK(max_abs(direct_sum(vacuum(1), vacuum(2)).cov.matrix() - MatrixXd::Identity(6, 6)) == 0.0);

  GaussianState ab = direct_sum(t, th);
  std::vector<int> a_modes = {0, 1};
  std::vector<int> b_modes = {2};
  CHECK(max_abs(partial_trace(ab, a_modes).cov.matrix() - t.cov.matrix()) == 0.0);
  CHECK(max_abs(partial_trace(ab, b_modes).cov.matrix() - th.cov.matrix()) == 0.0);

  std::vector<int> all = {2, 0, 1};
  CHECK(max_abs(partial_trace(ab, all).cov.matrix() - ab.cov.matrix()) == 0.0);

  std::vector<int> empty;
  std::vector<int> out = {3};
  std::vector<int> dup = {0, 0};
  CHECK_THROWS_AS(partial_trace(ab, empty), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(ab, out), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(ab, dup), std::invalid_argument);
}

TEST_CASE("apply symplectic") {
  GaussianState v = vacuum(1);
  CHECK(max_abs(apply_symplectic(v, SymplecticMatrix::identity(1)).cov.matrix() - v.cov.matrix()) == 0.0);
  CHECK(max_abs(apply_symplectic(v, rotation(M_PI / 2)).cov.matrix() - v.cov.matrix()) < 1e-15);
  const double r = 0.3;
  CHECK(max_abs(apply_symplectic(v, squeeze(r)).cov.matrix() - diag({std::exp(2 * r), std::exp(-2 * r)})) < 1e-14);
  CHECK_THROWS_AS(apply_symplectic(vacuum(2), squeeze(r)), std::invalid_argument);

  Eigen::VectorXd d(2);
  d << 1.0, 2.0;
  GaussianState disp(CovarianceMatrix::vacuum(1), d);
  GaussianState moved = apply_symplectic(disp, rotation(M_PI / 2));
  CHECK(moved.displacement(0) == doctest::Approx(2.0));
  CHECK(moved.displacement(1) == doctest::Approx(-1.0));
}

TEST_CASE("symplectic matrix checks") {
  CHECK_THROWS_AS(SymplecticMatrix(2.0 * MatrixXd::Identity(2, 2)), ValidationError);
  SymplecticMatrix s = three_mode_squeezer(0.7);
  CHECK(SymplecticMatrix::symplectic_defect(s.matrix()) < 1e-12);
  CHECK(max_abs((s * s.inverse()).matrix() - MatrixXd::Identity(6, 6)) < 1e-12);
}

TEST_CASE("assemble pure") {
  PureXY xy{MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)};
  CHECK(max_abs(assemble_pure(xy).matrix() - MatrixXd::Identity(4, 4)) == 0.0);

  MatrixXd x(1, 1);
  x(0, 0) = std::exp(0.8);
  CovarianceMatrix sq = assemble_pure({x, MatrixXd::Zero(1, 1)});
  CHECK(max_abs(sq.matrix() - diag({std::exp(0.8), std::exp(-0.8)})) < 1e-14);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  MatrixXd a = MatrixXd::NullaryExpr(3, 3, [&] { return g(rng); });
  MatrixXd y = MatrixXd::NullaryExpr(3, 3, [&] { return g(rng); });
  PureXY r{a * a.transpose() + 0.1 * MatrixXd::Identity(3, 3), y + y.transpose()};
  CHECK(is_pure(assemble_pure(r), 1e-9));

  CHECK_THROWS_AS(assemble_pure({-MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)}), std::invalid_argument);
}

TEST_CASE("williamson decomposition") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> nb(0.0, 2.0);
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> nbars(n);
      for (auto& x : nbars) x = nb(rng);
      if (trial == 0) std::fill(nbars.begin(), nbars.end(), 0.7);  // degenerate spectrum
      CovarianceMatrix sigma = apply_symplectic(thermal_product(nbars).cov, random_symplectic(n, rng));
      WilliamsonDecomposition w = williamson_decomposition(sigma);
      Eigen::VectorXd d(2 * n);
      for (int k = 0; k < n; ++k) d(k) = d(k + n) = w.nu[k];
      MatrixXd s = w.symplectic.matrix();
      CHECK(max_abs(s * d.asDiagonal() * s.transpose() - sigma.matrix()) < 1e-9 * max_abs(sigma.matrix()));
      CovarianceMatrix pi = williamson_pure_part(sigma);
      CHECK(is_pure(pi, 1e-8));
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma.matrix() - pi.matrix());
      CHECK(es.eigenvalues().minCoeff() > -1e-9);
    }
  }
  CHECK_THROWS_AS(williamson_decomposition(CovarianceMatrix(0.5 * MatrixXd::Identity(2, 2))),
                  UnphysicalStateError);
}

TEST_CASE("property: symplectic spectra are invariant") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> nb(0.0, 3.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    std::vector<double> nbars(n);
    for (auto& x : nbars) x = nb(rng);
    CovarianceMatrix sigma = apply_symplectic(thermal_product(nbars).cov, random_symplectic(n, rng));
    CovarianceMatrix moved = apply_symplectic(sigma, random_symplectic(n, rng));
    auto a = symplectic_eigenvalues(sigma);
    auto b = symplectic_eigenvalues(moved);
    for (int k = 0; k < n; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-8 * a[k]);
  }
}

TEST_CASE("embed local") {
  std::vector<Eigen::Matrix2d> blocks = {rotation2(0.3), Eigen::Matrix2d::Identity() * 2.0};
  MatrixXd e = embed_local(blocks);
  CHECK(e(0, 2) == doctest::Approx(blocks[0](0, 1)));
  CHECK(e(1, 1) == 2.0);
  CHECK(e(3, 3) == 2.0);
  CHECK(e(1, 3) == 0.0);
  CHECK(e(0, 1) == 0.0);
}
