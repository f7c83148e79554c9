#include "mgeof/states.hpp"

#include "mgeof/errors.hpp"

#include <fmt/format.h>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace mgeof {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUnbounded = std::numeric_limits<double>::infinity();

double wrap_2pi(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

// Wraps into (-pi, pi].
double wrap_pi(double phi) {
  double w = wrap_2pi(phi);
  return w > std::numbers::pi ? w - kTwoPi : w;
}

void check_squeeze(double r, double r_max) {
  if (!(std::abs(r) <= r_max)) {
    throw std::invalid_argument(fmt::format("squeezing |r| = {} exceeds r_max = {}", std::abs(r), r_max));
  }
}

Eigen::Matrix2d cross_block(const Eigen::MatrixXd& m, int i, int j) {
  const int n = static_cast<int>(m.rows() / 2);
  Eigen::Matrix2d b;
  b << m(i, j), m(i, j + n), m(i + n, j), m(i + n, j + n);
  return b;
}

Eigen::MatrixXd conjugate_local(const Eigen::MatrixXd& sigma, const std::vector<Eigen::Matrix2d>& local) {
  const Eigen::MatrixXd l = embed_local(local);
  Eigen::MatrixXd out = l * sigma * l.transpose();
  return 0.5 * (out + out.transpose());
}

// Symmetric det-1 matrix L with L B L^T = sqrt(det B) I, and that scale.
std::pair<Eigen::Matrix2d, double> local_williamson(const Eigen::Matrix2d& block) {
  const double a = std::sqrt(block.determinant());
  if (!(a > 0.0)) throw DomainError("mode block is not positive definite");
  const Eigen::Matrix2d normalized = block / a;
  if ((normalized - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-15) {
    return {Eigen::Matrix2d::Identity(), a};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(normalized);
  return {es.operatorInverseSqrt(), a};
}

// Rotation angles (x, y) making R(x) M R(y)^T diagonal, with the smallest
// max(|x|, |y|) among the discrete solution set.
std::pair<double, double> diagonalizing_angles(const Eigen::Matrix2d& m) {
  const double p = 0.5 * (m(0, 0) + m(1, 1));
  const double q = 0.5 * (m(0, 1) - m(1, 0));
  const double r = 0.5 * (m(0, 0) - m(1, 1));
  const double s = 0.5 * (m(0, 1) + m(1, 0));
  const double beta1 = std::atan2(q, p);
  const double beta2 = std::atan2(s, r);
  double best_x = 0.0;
  double best_y = 0.0;
  double best_key = std::numeric_limits<double>::infinity();
  for (int k = -2; k <= 2; ++k) {
    for (int j = -2; j <= 2; ++j) {
      const double x = wrap_pi(0.5 * (beta2 - beta1 + (k + j) * std::numbers::pi));
      const double y = wrap_pi(0.5 * (beta2 + beta1 + (j - k) * std::numbers::pi));
      const double key = std::max(std::abs(x), std::abs(y)) + 1e-3 * (std::abs(x) + std::abs(y));
      if (key < best_key - 1e-12) {
        best_key = key;
        best_x = x;
        best_y = y;
      }
    }
  }
  return {best_x, best_y};
}

}  // namespace

GluoParams::GluoParams(std::vector<ModeGluo> modes, double r_max) : modes_(std::move(modes)) {
  if (modes_.empty()) throw std::invalid_argument("GluoParams needs at least one mode");
  for (auto& m : modes_) {
    check_squeeze(m.r, r_max);
    m.phi_in = wrap_2pi(m.phi_in);
    m.phi_out = wrap_2pi(m.phi_out);
  }
}

GluoParams GluoParams::identity(int n_modes) {
  return GluoParams(std::vector<ModeGluo>(n_modes));
}

Pure3Params::Pure3Params(double x1, double x2, double x3) : a1(x1), a2(x2), a3(x3) {
  const std::array<double, 3> a{a1, a2, a3};
  for (int k = 0; k < 3; ++k) {
    if (!(a[k] >= 1.0 - 1e-12)) throw std::invalid_argument(fmt::format("a{} = {} is below 1", k + 1, a[k]));
    const double lhs = std::abs(a[(k + 1) % 3] - a[(k + 2) % 3]);
    if (lhs > a[k] - 1.0 + 1e-12 * std::max(1.0, a[k])) {
      throw std::invalid_argument(
          fmt::format("triangle condition |a_i - a_j| <= a_k - 1 violated by ({}, {}, {})", a1, a2, a3));
    }
  }
}

GaussianState vacuum(int n_modes) {
  return GaussianState(CovarianceMatrix::vacuum(n_modes));
}

GaussianState thermal(double nbar) {
  if (!(nbar >= 0.0)) throw std::invalid_argument(fmt::format("thermal occupation must be >= 0, got {}", nbar));
  return GaussianState(CovarianceMatrix((2.0 * nbar + 1.0) * Eigen::MatrixXd::Identity(2, 2)));
}

GaussianState thermal_product(const std::vector<double>& nbars) {
  if (nbars.empty()) throw std::invalid_argument("thermal_product needs at least one mode");
  const int n = static_cast<int>(nbars.size());
  Eigen::VectorXd d(2 * n);
  for (int k = 0; k < n; ++k) {
    if (!(nbars[k] >= 0.0)) throw std::invalid_argument(fmt::format("thermal occupation must be >= 0, got {}", nbars[k]));
    d(k) = d(k + n) = 2.0 * nbars[k] + 1.0;
  }
  return GaussianState(CovarianceMatrix(d.asDiagonal().toDenseMatrix()));
}

Eigen::Matrix2d rotation2(double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Matrix2d r;
  r << c, s, -s, c;
  return r;
}

Eigen::Matrix2d local_symplectic2(const ModeGluo& m) {
  const Eigen::Matrix2d sq = Eigen::Vector2d(std::exp(m.r), std::exp(-m.r)).asDiagonal();
  return rotation2(m.phi_out) * sq * rotation2(m.phi_in);
}

ModeGluo decompose_local(const Eigen::Matrix2d& m) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (std::abs(m.determinant() - 1.0) > 1e-8 * std::max(1.0, sv(0) * sv(0))) {
    throw DomainError("decompose_local: matrix is not symplectic");
  }
  if (sv(0) - sv(1) <= 1e-12 * sv(0)) {
    // Pure rotation.
    return {0.0, 0.0, wrap_2pi(std::atan2(m(0, 1), m(0, 0)))};
  }
  Eigen::Matrix2d u = svd.matrixU();
  Eigen::Matrix2d v = svd.matrixV();
  if (u.determinant() < 0.0) {
    u.col(1) *= -1.0;
    v.col(1) *= -1.0;
  }
  const Eigen::Matrix2d vt = v.transpose();
  return {wrap_2pi(std::atan2(vt(0, 1), vt(0, 0))), 0.5 * std::log(sv(0) / sv(1)),
          wrap_2pi(std::atan2(u(0, 1), u(0, 0)))};
}

SymplecticMatrix rotation(double phi) {
  return SymplecticMatrix(rotation2(phi));
}

SymplecticMatrix squeeze(double r, double r_max) {
  check_squeeze(r, r_max);
  return SymplecticMatrix(Eigen::Vector2d(std::exp(r), std::exp(-r)).asDiagonal().toDenseMatrix());
}

SymplecticMatrix gluo(const GluoParams& params) {
  std::vector<Eigen::Matrix2d> local;
  local.reserve(params.n_modes());
  for (const auto& m : params.modes()) local.push_back(local_symplectic2(m));
  return SymplecticMatrix(embed_local(local));
}

SymplecticMatrix two_mode_squeezer(double r, double r_max) {
  check_squeeze(r, r_max);
  const double c = std::cosh(r);
  const double s = std::sinh(r);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m.topLeftCorner(2, 2) << c, s, s, c;
  m.bottomRightCorner(2, 2) << c, -s, -s, c;
  return SymplecticMatrix(std::move(m));
}

SymplecticMatrix three_mode_squeezer(double r3, double r_max) {
  check_squeeze(r3, r_max);
  const double alpha_plus = std::cosh(r3) - std::sinh(r3) / 3.0;
  const double alpha_minus = std::cosh(r3) + std::sinh(r3) / 3.0;
  const double beta_plus = 2.0 * std::sinh(r3) / 3.0;
  const double beta_minus = -beta_plus;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      m(i, j) = i == j ? alpha_plus : beta_plus;
      m(i + 3, j + 3) = i == j ? alpha_minus : beta_minus;
    }
  }
  return SymplecticMatrix(std::move(m));
}

GaussianState ghzw(double r3, double r_max) {
  return apply_symplectic(vacuum(3), three_mode_squeezer(r3, r_max));
}

double ghzw_alpha_prime(double r3) {
  const double c = std::cosh(2.0 * r3);
  const double s = std::sinh(2.0 * r3);
  return std::sqrt(9.0 * c * c - s * s) / 3.0;
}

CovarianceMatrix ghzw_standard_form(double r3, double r_max) {
  check_squeeze(r3, r_max);
  const double c = std::cosh(2.0 * r3);
  const double s = std::abs(std::sinh(2.0 * r3));
  const double alpha = ghzw_alpha_prime(r3);
  const double beta_plus = 2.0 * s / 3.0 * std::sqrt((3.0 * c + s) / (3.0 * c - s));
  const double beta_minus = -2.0 * s / 3.0 * std::sqrt((3.0 * c - s) / (3.0 * c + s));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      m(i, j) = i == j ? alpha : beta_plus;
      m(i + 3, j + 3) = i == j ? alpha : beta_minus;
    }
  }
  return CovarianceMatrix(std::move(m));
}

GluoParams ghzw_standard_gluo(double r3) {
  const double c = std::cosh(2.0 * r3);
  const double s = std::sinh(2.0 * r3);
  // Equal local squeezers turn each reduced mode into alpha' I; for r3 < 0 a
  // quarter turn swaps the q and p blocks into the printed sign pattern.
  const double r_local = 0.25 * std::log((3.0 * c + s) / (3.0 * c - s));
  const double turn = r3 < 0.0 ? 0.5 * std::numbers::pi : 0.0;
  return GluoParams(std::vector<ModeGluo>(3, ModeGluo{0.0, r_local, turn}), kUnbounded);
}

// --- pure 3-mode standard form ------------------------------------------------

namespace {

// With u_k = (a_i + a_j - a_k - 1) / 2 every factor of the closed form is a
// sum of non-negative terms, so the couplings carry no cancellation error.
Pure3Couplings couplings_from_excess(const double (&u)[3]) {
  static constexpr int kPairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};  // (i, j, k)
  const double total = u[0] + u[1] + u[2];
  Pure3Couplings out{};
  for (int t = 0; t < 3; ++t) {
    const double ui = u[kPairs[t][0]];
    const double uj = u[kPairs[t][1]];
    const double uk = u[kPairs[t][2]];
    const double ai = 1.0 + total - ui;
    const double aj = 1.0 + total - uj;
    const double first = std::sqrt(ui * uj * (1.0 + ui) * (1.0 + uj));
    const double second = std::sqrt(uk * (1.0 + uk) * (1.0 + total) * (2.0 + total));
    const double denom = std::sqrt(ai * aj);
    out.plus[t] = (first + second) / denom;
    out.minus[t] = (first - second) / denom;
  }
  return out;
}

}  // namespace

Pure3Couplings pure3_couplings_closed_form(const Pure3Params& p) {
  double u[3];
  for (int k = 0; k < 3; ++k) u[k] = std::max(0.0, 0.5 * (p[(k + 1) % 3] + p[(k + 2) % 3] - p[k] - 1.0));
  return couplings_from_excess(u);
}

namespace {

Eigen::Matrix3d coupling_block(const Pure3Params& p, const double (&e)[3]) {
  Eigen::Matrix3d m;
  m << p.a1, e[0], e[1], e[0], p.a2, e[2], e[1], e[2], p.a3;
  return m;
}

CovarianceMatrix assemble_pure3(const Pure3Params& p, const Pure3Couplings& e) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 6);
  m.topLeftCorner(3, 3) = coupling_block(p, e.plus);
  m.bottomRightCorner(3, 3) = coupling_block(p, e.minus);
  return CovarianceMatrix(std::move(m));
}

// Residual Q P - I of the purity condition for the standard-form blocks.
struct PurityResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const Pure3Params* p;

  int inputs() const { return 6; }
  int values() const { return 9; }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    const double plus[3] = {x(0), x(1), x(2)};
    const double minus[3] = {x(3), x(4), x(5)};
    const Eigen::Matrix3d r = coupling_block(*p, plus) * coupling_block(*p, minus) - Eigen::Matrix3d::Identity();
    f = Eigen::Map<const Eigen::VectorXd>(r.data(), 9);
    return 0;
  }
};

}  // namespace

Pure3Couplings solve_pure3_couplings(const Pure3Params& p) {
  // Seed: the pair coupling of a two-mode squeezed vacuum, i.e. the closed
  // form with the term that vanishes in the two-mode limit dropped.
  Eigen::VectorXd x(6);
  static constexpr int kPairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
  for (int t = 0; t < 3; ++t) {
    const double ai = p[kPairs[t][0]];
    const double aj = p[kPairs[t][1]];
    const double ak = p[kPairs[t][2]];
    const double s2 = (ai + aj) * (ai + aj);
    const double seed = std::sqrt(std::max(0.0, (s2 - (ak - 1) * (ak - 1)) * (s2 - (ak + 1) * (ak + 1)))) /
                        (4.0 * std::sqrt(ai * aj));
    x(t) = seed;
    x(t + 3) = -seed;
  }

  PurityResidual residual{&p};
  Eigen::NumericalDiff<PurityResidual, Eigen::Central> numdiff(residual);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<PurityResidual, Eigen::Central>> lm(numdiff);
  lm.parameters.xtol = 1e-15;
  lm.parameters.ftol = 1e-15;
  lm.parameters.maxfev = 4000;
  lm.minimize(x);

  Eigen::VectorXd f(9);
  residual(x, f);
  const double scale = std::max({1.0, p.a1, p.a2, p.a3});
  if (f.cwiseAbs().maxCoeff() > 1e-10 * scale * scale) {
    throw NumericalError(fmt::format("pure standard form: purity root-finder stalled at residual {:.3e} for a = ({}, {}, {})",
                                     f.cwiseAbs().maxCoeff(), p.a1, p.a2, p.a3));
  }
  Pure3Couplings out{};
  for (int t = 0; t < 3; ++t) {
    out.plus[t] = x(t);
    out.minus[t] = x(t + 3);
  }
  // Roots related by a per-mode reflection (e_ij -> s_i s_j e_ij) or by the
  // global swap q <-> p describe the same state up to a local unitary. Map the
  // root onto the closed-form branch before comparing.
  static constexpr int kPairModes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  const auto closed = pure3_couplings_closed_form(p);
  double best_dev = std::numeric_limits<double>::infinity();
  Pure3Couplings best = out;
  for (int swap = 0; swap < 2; ++swap) {
    for (int signs = 0; signs < 8; ++signs) {
      Pure3Couplings cand{};
      double dev = 0.0;
      for (int t = 0; t < 3; ++t) {
        const int si = (signs >> kPairModes[t][0]) & 1 ? -1 : 1;
        const int sj = (signs >> kPairModes[t][1]) & 1 ? -1 : 1;
        cand.plus[t] = si * sj * (swap ? out.minus[t] : out.plus[t]);
        cand.minus[t] = si * sj * (swap ? out.plus[t] : out.minus[t]);
        dev = std::max({dev, std::abs(cand.plus[t] - closed.plus[t]), std::abs(cand.minus[t] - closed.minus[t])});
      }
      if (dev < best_dev) {
        best_dev = dev;
        best = cand;
      }
    }
  }
  // On the triangle boundary the root is degenerate and only resolved to the
  // square root of the residual tolerance.
  if (best_dev > 1e-6 * scale) {
    throw NumericalError(fmt::format("pure standard form: root-finder solution differs from closed form by {:.3e} "
                                     "for a = ({}, {}, {})",
                                     best_dev, p.a1, p.a2, p.a3));
  }
  return best;
}

CovarianceMatrix pure3_standard_form(const Pure3Params& p) {
  return assemble_pure3(p, solve_pure3_couplings(p));
}

CovarianceMatrix pure3_standard_form_closed(const Pure3Params& p) {
  return assemble_pure3(p, pure3_couplings_closed_form(p));
}

CovarianceMatrix pure3_standard_form_excess(double u1, double u2, double u3) {
  if (!(u1 >= 0.0 && u2 >= 0.0 && u3 >= 0.0)) throw std::invalid_argument("excess coordinates must be >= 0");
  const double u[3] = {u1, u2, u3};
  return assemble_pure3(Pure3Params(1.0 + u2 + u3, 1.0 + u1 + u3, 1.0 + u1 + u2), couplings_from_excess(u));
}

CovarianceMatrix pure3_family(const Pure3Params& p, const GluoParams& g) {
  if (g.n_modes() != 3) throw std::invalid_argument("pure3_family needs 3-mode GLUO parameters");
  return apply_symplectic(pure3_standard_form(p), gluo(g));
}

CovarianceMatrix pure_standard_form(const std::vector<double>& a) {
  switch (a.size()) {
    case 1:
      return CovarianceMatrix::vacuum(1);
    case 2: {
      const double s = std::sqrt(std::max(0.0, a[0] * a[0] - 1.0));
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
      m.topLeftCorner(2, 2) << a[0], s, s, a[0];
      m.bottomRightCorner(2, 2) << a[0], -s, -s, a[0];
      return CovarianceMatrix(std::move(m));
    }
    case 3:
      return pure3_standard_form_closed(Pure3Params(a[0], a[1], a[2]));
    default:
      throw UnsupportedSizeError(fmt::format("pure standard form is implemented for 1-3 modes, got {}", a.size()));
  }
}

namespace {

// Finds local rotations R with R target_sf R^T = normalized, where both
// matrices have every mode block equal to a_i I.
struct RotationMatch {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const Eigen::MatrixXd* standard;
  const Eigen::MatrixXd* target;

  int inputs() const { return static_cast<int>(standard->rows() / 2); }
  int values() const { return static_cast<int>(standard->size()); }

  int operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& f) const {
    const Eigen::MatrixXd diff = rotated(theta) - *target;
    f = Eigen::Map<const Eigen::VectorXd>(diff.data(), diff.size());
    return 0;
  }

  Eigen::MatrixXd rotated(const Eigen::VectorXd& theta) const {
    std::vector<Eigen::Matrix2d> rot;
    for (Eigen::Index k = 0; k < theta.size(); ++k) rot.push_back(rotation2(theta(k)));
    return conjugate_local(*standard, rot);
  }
};

}  // namespace

PureDecomposition decompose_pure(const CovarianceMatrix& pure_cov) {
  const int n = pure_cov.n_modes();
  if (n > 3) throw UnsupportedSizeError(fmt::format("decompose_pure supports up to 3 modes, got {}", n));
  if (!is_pure(pure_cov, 1e-8)) throw DomainError("decompose_pure needs a pure state");

  std::vector<Eigen::Matrix2d> will(n);
  std::vector<double> a(n);
  for (int k = 0; k < n; ++k) std::tie(will[k], a[k]) = local_williamson(pure_cov.mode_block(k));
  // A pure two-mode state has equal local mixednesses.
  if (n == 2) a[0] = a[1] = 0.5 * (a[0] + a[1]);
  if (n == 3) {
    // Project onto the triangle region to absorb round-off.
    for (int k = 0; k < 3; ++k) a[k] = std::max(a[k], 1.0);
    const double x1 = a[0] - 1, x2 = a[1] - 1, x3 = a[2] - 1;
    const double half = 0.5 * (x1 + x2 + x3);
    const double u1 = std::max(0.0, half - x1), u2 = std::max(0.0, half - x2), u3 = std::max(0.0, half - x3);
    a = {1 + u2 + u3, 1 + u1 + u3, 1 + u1 + u2};
  }
  if (n == 1) a[0] = 1.0;

  const Eigen::MatrixXd normalized = conjugate_local(pure_cov.matrix(), will);
  const Eigen::MatrixXd standard = pure_standard_form(a).matrix();

  RotationMatch match{&standard, &normalized};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  if (n > 1) {
    // Coarse scan over the torus, then Levenberg-Marquardt polish.
    constexpr int kSteps = 12;
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd trial(n);
    const int total = static_cast<int>(std::pow(kSteps, n));
    for (int idx = 0; idx < total; ++idx) {
      int rem = idx;
      for (int k = 0; k < n; ++k) {
        trial(k) = kTwoPi * (rem % kSteps) / kSteps;
        rem /= kSteps;
      }
      const double err = (match.rotated(trial) - normalized).squaredNorm();
      if (err < best) {
        best = err;
        theta = trial;
      }
    }
    Eigen::NumericalDiff<RotationMatch, Eigen::Central> numdiff(match);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<RotationMatch, Eigen::Central>> lm(numdiff);
    lm.parameters.xtol = 1e-15;
    lm.parameters.ftol = 1e-15;
    lm.minimize(theta);
  }

  // pure_cov = W^-1 R pi_sf R^T W^-T, so the local map is W^-1 R(theta).
  std::vector<ModeGluo> modes(n);
  for (int k = 0; k < n; ++k) modes[k] = decompose_local(will[k].inverse() * rotation2(theta(k)));
  GluoParams g(std::move(modes), kUnbounded);

  const Eigen::MatrixXd rebuilt = apply_symplectic(pure_standard_form(a), gluo(g)).matrix();
  const double scale = std::max(1.0, pure_cov.matrix().cwiseAbs().maxCoeff());
  const double err = (rebuilt - pure_cov.matrix()).cwiseAbs().maxCoeff();
  if (err > 1e-7 * scale) {
    throw NumericalError(fmt::format("decompose_pure: reconstruction error {:.3e}", err));
  }
  return {std::move(a), std::move(g)};
}

// --- q-p structure ------------------------------------------------------------

bool is_qp(const CovarianceMatrix& cov, double tol) {
  const double scale = std::max(1.0, cov.matrix().cwiseAbs().maxCoeff());
  return cov.qp_block().cwiseAbs().maxCoeff() <= tol * scale;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> qp_split(const CovarianceMatrix& cov) {
  if (!is_qp(cov)) {
    throw DomainError(fmt::format("state is not q-p (max q-p coupling {:.3e})", cov.qp_block().cwiseAbs().maxCoeff()));
  }
  return {cov.q_block(), cov.p_block()};
}

// --- mixed 3-mode standard form ---------------------------------------------

double standard_form_defect(const CovarianceMatrix& cov) {
  if (cov.n_modes() != 3) throw UnsupportedSizeError("standard form is defined for 3-mode states");
  const Eigen::MatrixXd c = cov.qp_block();  // rows q_i, columns p_j
  const double scale = std::max(1.0, cov.matrix().cwiseAbs().maxCoeff());
  const double worst = std::max({std::abs(c(0, 0)), std::abs(c(0, 1)), std::abs(c(1, 0)), std::abs(c(1, 1)),
                                 std::abs(c(2, 0)), std::abs(c(2, 2))});
  return worst / scale;
}

std::pair<CovarianceMatrix, GluoParams> mixed3_standard_form(const CovarianceMatrix& cov) {
  if (cov.n_modes() != 3) {
    throw UnsupportedSizeError(fmt::format("mixed standard form needs a 3-mode state, got {}", cov.n_modes()));
  }
  const auto diag = validate_physical(cov);
  if (!diag.physical) {
    throw UnphysicalStateError(fmt::format("unphysical covariance matrix (smallest nu = {})", diag.worst_nu),
                               diag.worst_nu);
  }

  std::vector<Eigen::Matrix2d> will(3);
  for (int k = 0; k < 3; ++k) will[k] = local_williamson(cov.mode_block(k)).first;
  const Eigen::MatrixXd w = conjugate_local(cov.matrix(), will);

  // Zero (q1,p2) and (q2,p1) by diagonalizing the 1-2 block, then (q3,p1).
  const auto [x, y] = diagonalizing_angles(cross_block(w, 0, 1));
  const Eigen::RowVector2d row = (rotation2(x) * cross_block(w, 0, 2)).row(1);
  double z = std::atan2(-row(0), row(1));
  if (row.cwiseAbs().maxCoeff() <= 1e-15) z = 0.0;
  // Solutions repeat every pi; take the representative in (-pi/2, pi/2].
  z = wrap_pi(z);
  if (z > 0.5 * std::numbers::pi) z -= std::numbers::pi;
  if (z <= -0.5 * std::numbers::pi) z += std::numbers::pi;

  const double theta[3] = {x, y, z};
  std::vector<ModeGluo> modes(3);
  for (int k = 0; k < 3; ++k) modes[k] = decompose_local(rotation2(theta[k]) * will[k]);
  GluoParams g(std::move(modes), kUnbounded);

  CovarianceMatrix sf = apply_symplectic(cov, gluo(g));
  const double defect = standard_form_defect(sf);
  if (defect > 1e-8) {
    throw NumericalError(fmt::format("mixed standard form: zero pattern missed by {:.3e}", defect));
  }
  return {std::move(sf), std::move(g)};
}

}  // namespace mgeof
