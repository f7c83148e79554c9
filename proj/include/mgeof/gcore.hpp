#pragma once

// Symplectic linear algebra over Gaussian covariance matrices.
//
// Conventions used throughout the library:
//   * quadratures are ordered (q1..qN, p1..pN) ("qqpp");
//   * covariance matrices are vacuum-normalized, so the vacuum is the identity
//     and a state is physical iff every symplectic eigenvalue is >= 1;
//   * the symplectic form is Omega = [[0, I], [-I, 0]].

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mgeof {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPhysicalTol = 1e-9;
inline constexpr double kPurityTol = 1e-9;
inline constexpr double kSymplecticTol = 1e-10;

/// Omega = [[0, I], [-I, 0]] for n modes.
Eigen::MatrixXd symplectic_form(int n_modes);

class CovarianceMatrix {
 public:
  /// Validates shape (square, even dimension) and symmetry within
  /// kSymmetryTol relative to the largest entry; the stored matrix is the
  /// exact symmetric part. Throws ValidationError.
  explicit CovarianceMatrix(Eigen::MatrixXd entries);

  static CovarianceMatrix vacuum(int n_modes);

  int n_modes() const { return static_cast<int>(m_.rows() / 2); }
  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// N x N blocks: <q q>, <p p> and the q-p coupling <q p>.
  Eigen::MatrixXd q_block() const { return m_.topLeftCorner(n_modes(), n_modes()); }
  Eigen::MatrixXd p_block() const { return m_.bottomRightCorner(n_modes(), n_modes()); }
  Eigen::MatrixXd qp_block() const { return m_.topRightCorner(n_modes(), n_modes()); }

  /// 2x2 (q_k, p_k) block of a single mode.
  Eigen::Matrix2d mode_block(int k) const;

 private:
  Eigen::MatrixXd m_;
};

struct GaussianState {
  GaussianState(CovarianceMatrix cov, Eigen::VectorXd displacement);
  explicit GaussianState(CovarianceMatrix cov);

  int n_modes() const { return cov.n_modes(); }

  CovarianceMatrix cov;
  Eigen::VectorXd displacement;
};

class SymplecticMatrix {
 public:
  /// Throws ValidationError unless M Omega M^T = Omega within
  /// kSymplecticTol, relative to max(1, |M|_max^2).
  explicit SymplecticMatrix(Eigen::MatrixXd entries);

  static SymplecticMatrix identity(int n_modes);

  int n_modes() const { return static_cast<int>(m_.rows() / 2); }
  const Eigen::MatrixXd& matrix() const { return m_; }

  /// Largest entry of |M Omega M^T - Omega|.
  static double symplectic_defect(const Eigen::MatrixXd& m);

  SymplecticMatrix inverse() const;
  SymplecticMatrix operator*(const SymplecticMatrix& rhs) const;

 private:
  Eigen::MatrixXd m_;
};

/// Pure-state parametrization pi(X, Y) = [[X, XY], [YX, YXY + X^-1]].
struct PureXY {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

/// Absolute values of the eigenvalues of i Omega sigma, one per mode,
/// sorted descending. Throws ValidationError for non-symmetric input.
std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& cov);

struct PhysicalityDiagnosis {
  bool physical;
  double worst_nu;  // smallest symplectic eigenvalue
};

PhysicalityDiagnosis validate_physical(const CovarianceMatrix& cov);

/// All symplectic eigenvalues within kPurityTol of 1.
bool is_pure(const CovarianceMatrix& cov, double tol = kPurityTol);

/// Reduced state on `keep` (0-based, any order; the result follows
/// ascending mode order). Throws std::invalid_argument for empty,
/// duplicate or out-of-range indices.
GaussianState partial_trace(const GaussianState& state, std::span<const int> keep);
CovarianceMatrix partial_trace(const CovarianceMatrix& cov, std::span<const int> keep);

/// Modes of `a` followed by modes of `b`, preserving qqpp ordering.
GaussianState direct_sum(const GaussianState& a, const GaussianState& b);
CovarianceMatrix direct_sum(const CovarianceMatrix& a, const CovarianceMatrix& b);

/// cov -> M cov M^T, displacement -> M displacement.
GaussianState apply_symplectic(const GaussianState& state, const SymplecticMatrix& m);
CovarianceMatrix apply_symplectic(const CovarianceMatrix& cov, const SymplecticMatrix& m);

/// Throws std::invalid_argument if X is not symmetric positive definite or
/// Y is not symmetric.
CovarianceMatrix assemble_pure(const PureXY& xy);

/// S S^T for the Williamson decomposition sigma = S diag(nu, nu) S^T: a pure
/// state with sigma - pi >= 0. Computed as sigma^1/2 |i sigma^1/2 Omega sigma^1/2|^-1 sigma^1/2.
/// Throws UnphysicalStateError for unphysical input.
CovarianceMatrix williamson_pure_part(const CovarianceMatrix& cov);

struct WilliamsonDecomposition {
  SymplecticMatrix symplectic;  // S
  std::vector<double> nu;       // descending; sigma = S diag(nu, nu) S^T
};

/// Throws UnphysicalStateError for unphysical input.
WilliamsonDecomposition williamson_decomposition(const CovarianceMatrix& cov);

/// Embeds per-mode 2x2 (q, p) matrices into a block-local 2N x 2N matrix.
Eigen::MatrixXd embed_local(std::span<const Eigen::Matrix2d> per_mode);

}  // namespace mgeof
