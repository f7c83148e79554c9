#include "mgeof/gcore.hpp"

#include "mgeof/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>

namespace mgeof {

Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  omega.topRightCorner(n_modes, n_modes).setIdentity();
  omega.bottomLeftCorner(n_modes, n_modes) = -Eigen::MatrixXd::Identity(n_modes, n_modes);
  return omega;
}

namespace {

void require_square_even(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw ValidationError(
        fmt::format("{} must be a non-empty 2N x 2N matrix, got {} x {}", what, m.rows(), m.cols()));
  }
  if (!m.allFinite()) {
    throw ValidationError(fmt::format("{} has non-finite entries", what));
  }
}

}  // namespace

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd entries) {
  require_square_even(entries, "covariance matrix");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw ValidationError(fmt::format("covariance matrix is not symmetric (max |A - A^T| = {:.3e})", asym));
  }
  m_ = 0.5 * (entries + entries.transpose());
}

CovarianceMatrix CovarianceMatrix::vacuum(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("vacuum needs at least one mode");
  return CovarianceMatrix(Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
}

Eigen::Matrix2d CovarianceMatrix::mode_block(int k) const {
  const int n = n_modes();
  if (k < 0 || k >= n) throw std::invalid_argument(fmt::format("mode {} out of range", k));
  Eigen::Matrix2d b;
  b << m_(k, k), m_(k, k + n), m_(k + n, k), m_(k + n, k + n);
  return b;
}

GaussianState::GaussianState(CovarianceMatrix c, Eigen::VectorXd d)
    : cov(std::move(c)), displacement(std::move(d)) {
  if (displacement.size() != cov.dim()) {
    throw ValidationError(fmt::format("displacement has length {}, expected {}", displacement.size(), cov.dim()));
  }
}

GaussianState::GaussianState(CovarianceMatrix c)
    : cov(std::move(c)), displacement(Eigen::VectorXd::Zero(cov.dim())) {}

double SymplecticMatrix::symplectic_defect(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows() / 2);
  const Eigen::MatrixXd omega = symplectic_form(n);
  return (m * omega * m.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticMatrix::SymplecticMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
  require_square_even(m_, "symplectic matrix");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  const double defect = symplectic_defect(m_);
  if (defect > kSymplecticTol * scale * scale) {
    throw ValidationError(fmt::format("matrix is not symplectic (defect {:.3e})", defect));
  }
}

SymplecticMatrix SymplecticMatrix::identity(int n_modes) {
  return SymplecticMatrix(Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
}

SymplecticMatrix SymplecticMatrix::inverse() const {
  // M^-1 = -Omega M^T Omega
  const Eigen::MatrixXd omega = symplectic_form(n_modes());
  return SymplecticMatrix(-omega * m_.transpose() * omega);
}

SymplecticMatrix SymplecticMatrix::operator*(const SymplecticMatrix& rhs) const {
  if (rhs.n_modes() != n_modes()) throw std::invalid_argument("symplectic product: mode count mismatch");
  return SymplecticMatrix(m_ * rhs.m_);
}

std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& cov) {
  const int n = cov.n_modes();
  const Eigen::MatrixXd& s = cov.matrix();
  const Eigen::MatrixXd omega = symplectic_form(n);

  std::vector<double> mags;
  mags.reserve(2 * n);
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() == Eigen::Success) {
    // With sigma = L L^T, i Omega sigma is similar to the Hermitian i L^T Omega L.
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::MatrixXcd herm = std::complex<double>(0.0, 1.0) * (l.transpose() * omega * l).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mags.push_back(std::abs(es.eigenvalues()(i)));
  } else {
    const Eigen::MatrixXcd m = std::complex<double>(0.0, 1.0) * (omega * s).cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mags.push_back(std::abs(es.eigenvalues()(i)));
  }
  // Eigenvalues come in +-nu pairs; keep one of each pair.
  std::sort(mags.begin(), mags.end(), std::greater<>());
  std::vector<double> nus(n);
  for (int k = 0; k < n; ++k) nus[k] = 0.5 * (mags[2 * k] + mags[2 * k + 1]);
  return nus;
}

PhysicalityDiagnosis validate_physical(const CovarianceMatrix& cov) {
  const auto nus = symplectic_eigenvalues(cov);
  const double worst = nus.back();
  // An indefinite matrix can still have |eigenvalues| >= 1.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.matrix(), Eigen::EigenvaluesOnly);
  const bool positive = es.eigenvalues().minCoeff() > 0.0;
  return {positive && worst >= 1.0 - kPhysicalTol, positive ? worst : std::min(worst, es.eigenvalues().minCoeff())};
}

bool is_pure(const CovarianceMatrix& cov, double tol) {
  const auto diag = validate_physical(cov);
  if (!diag.physical) return false;
  const auto nus = symplectic_eigenvalues(cov);
  return std::all_of(nus.begin(), nus.end(), [tol](double nu) { return std::abs(nu - 1.0) <= tol; });
}

namespace {

std::vector<int> checked_keep(std::span<const int> keep, int n_modes) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::vector<int> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("partial_trace: duplicate mode index");
  }
  if (sorted.front() < 0 || sorted.back() >= n_modes) {
    throw std::invalid_argument(fmt::format("partial_trace: mode index out of range [0, {})", n_modes));
  }
  return sorted;
}

std::vector<int> quadrature_indices(const std::vector<int>& modes, int n_modes) {
  std::vector<int> idx(modes);
  for (int m : modes) idx.push_back(m + n_modes);
  return idx;
}

}  // namespace

CovarianceMatrix partial_trace(const CovarianceMatrix& cov, std::span<const int> keep) {
  const auto modes = checked_keep(keep, cov.n_modes());
  const auto idx = quadrature_indices(modes, cov.n_modes());
  return CovarianceMatrix(cov.matrix()(idx, idx));
}

GaussianState partial_trace(const GaussianState& state, std::span<const int> keep) {
  const auto modes = checked_keep(keep, state.n_modes());
  const auto idx = quadrature_indices(modes, state.n_modes());
  return GaussianState(CovarianceMatrix(state.cov.matrix()(idx, idx)), state.displacement(idx));
}

CovarianceMatrix direct_sum(const CovarianceMatrix& a, const CovarianceMatrix& b) {
  const int na = a.n_modes();
  const int nb = b.n_modes();
  const int n = na + nb;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  // Quadrature index of (mode, q|p) in each operand and in the result.
  for (int i = 0; i < 2 * na; ++i) {
    const int ri = i < na ? i : i - na + n;
    for (int j = 0; j < 2 * na; ++j) m(ri, j < na ? j : j - na + n) = a(i, j);
  }
  for (int i = 0; i < 2 * nb; ++i) {
    const int ri = i < nb ? na + i : n + na + (i - nb);
    for (int j = 0; j < 2 * nb; ++j) m(ri, j < nb ? na + j : n + na + (j - nb)) = b(i, j);
  }
  return CovarianceMatrix(std::move(m));
}

GaussianState direct_sum(const GaussianState& a, const GaussianState& b) {
  const int na = a.n_modes();
  const int nb = b.n_modes();
  Eigen::VectorXd d(2 * (na + nb));
  d << a.displacement.head(na), b.displacement.head(nb), a.displacement.tail(na), b.displacement.tail(nb);
  return GaussianState(direct_sum(a.cov, b.cov), std::move(d));
}

CovarianceMatrix apply_symplectic(const CovarianceMatrix& cov, const SymplecticMatrix& m) {
  if (m.n_modes() != cov.n_modes()) {
    throw std::invalid_argument(
        fmt::format("apply_symplectic: {}-mode matrix on {}-mode state", m.n_modes(), cov.n_modes()));
  }
  Eigen::MatrixXd out = m.matrix() * cov.matrix() * m.matrix().transpose();
  return CovarianceMatrix(0.5 * (out + out.transpose()));
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticMatrix& m) {
  return GaussianState(apply_symplectic(state.cov, m), m.matrix() * state.displacement);
}

CovarianceMatrix assemble_pure(const PureXY& xy) {
  const auto& x = xy.x;
  const auto& y = xy.y;
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows() || x.rows() == 0) {
    throw std::invalid_argument("assemble_pure: X and Y must be square and of equal size");
  }
  const double xs = std::max(1.0, x.cwiseAbs().maxCoeff());
  const double ys = std::max(1.0, y.cwiseAbs().maxCoeff());
  if ((x - x.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * xs) {
    throw std::invalid_argument("assemble_pure: X is not symmetric");
  }
  if ((y - y.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * ys) {
    throw std::invalid_argument("assemble_pure: Y is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("assemble_pure: X is not positive definite");

  const int n = static_cast<int>(x.rows());
  const Eigen::MatrixXd xinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = x;
  m.topRightCorner(n, n) = x * y;
  m.bottomLeftCorner(n, n) = y * x;
  m.bottomRightCorner(n, n) = y * x * y + xinv;
  return CovarianceMatrix(0.5 * (m + m.transpose()));
}

CovarianceMatrix williamson_pure_part(const CovarianceMatrix& cov) {
  const auto diag = validate_physical(cov);
  if (!diag.physical) {
    throw UnphysicalStateError(fmt::format("unphysical covariance matrix (smallest nu = {})", diag.worst_nu),
                               diag.worst_nu);
  }
  const int n = cov.n_modes();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.matrix());
  const Eigen::MatrixXd root = es.operatorSqrt();
  const Eigen::MatrixXd omega = symplectic_form(n);
  // (i root Omega root)^2 = -root Omega sigma Omega root, which is positive definite.
  const Eigen::MatrixXd sq = -root * omega * cov.matrix() * omega * root;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(0.5 * (sq + sq.transpose()));
  const Eigen::MatrixXd pi = root * es2.operatorInverseSqrt() * root;
  return CovarianceMatrix(0.5 * (pi + pi.transpose()));
}

WilliamsonDecomposition williamson_decomposition(const CovarianceMatrix& cov) {
  const auto diag = validate_physical(cov);
  if (!diag.physical) {
    throw UnphysicalStateError(fmt::format("unphysical covariance matrix (smallest nu = {})", diag.worst_nu),
                               diag.worst_nu);
  }
  const int n = cov.n_modes();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.matrix());
  const Eigen::MatrixXd root = es.operatorSqrt();
  // M = root Omega root is antisymmetric; an eigenvector x + iy of iM with
  // eigenvalue nu > 0 gives M x = nu y and M y = -nu x, and eigenvectors of a
  // Hermitian matrix keep all these real pairs mutually orthogonal.
  const Eigen::MatrixXd m = root * symplectic_form(n) * root;
  const Eigen::MatrixXcd herm = std::complex<double>(0.0, 1.0) * m.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(herm);
  // Eigenvalues ascend, so the last n are the positive ones, largest last.
  Eigen::MatrixXd o(2 * n, 2 * n);
  Eigen::VectorXd d(2 * n);
  std::vector<double> nu(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Index col = 2 * n - 1 - k;
    const Eigen::VectorXcd v = hs.eigenvectors().col(col);
    nu[k] = hs.eigenvalues()(col);
    o.col(k) = std::sqrt(2.0) * v.imag();
    o.col(k + n) = std::sqrt(2.0) * v.real();
    d(k) = d(k + n) = 1.0 / std::sqrt(nu[k]);
  }
  return {SymplecticMatrix(root * o * d.asDiagonal()), std::move(nu)};
}

Eigen::MatrixXd embed_local(std::span<const Eigen::Matrix2d> per_mode) {
  const int n = static_cast<int>(per_mode.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    const auto& b = per_mode[k];
    m(k, k) = b(0, 0);
    m(k, k + n) = b(0, 1);
    m(k + n, k) = b(1, 0);
    m(k + n, k + n) = b(1, 1);
  }
  return m;
}

}  // namespace mgeof
