#pragma once

// State factories, local (per-mode) symplectic operations and 3-mode
// standard forms.

#include "mgeof/gcore.hpp"

#include <utility>
#include <vector>

namespace mgeof {

inline constexpr double kDefaultMaxSqueeze = 5.0;

/// One mode's local symplectic R(phi_out) S(r) R(phi_in).
struct ModeGluo {
  double phi_in = 0.0;
  double r = 0.0;
  double phi_out = 0.0;
};

/// Local Gaussian unitary parameters, one triple per mode. Angles are reduced
/// to [0, 2pi) on construction; |r| <= r_max is enforced (std::invalid_argument).
class GluoParams {
 public:
  explicit GluoParams(std::vector<ModeGluo> modes, double r_max = kDefaultMaxSqueeze);
  static GluoParams identity(int n_modes);

  int n_modes() const { return static_cast<int>(modes_.size()); }
  const std::vector<ModeGluo>& modes() const { return modes_; }
  const ModeGluo& operator[](int k) const { return modes_[k]; }

 private:
  std::vector<ModeGluo> modes_;
};

/// Single-mode mixednesses of the pure 3-mode standard form. Requires
/// a_i >= 1 and |a_i - a_j| <= a_k - 1 for every permutation.
struct Pure3Params {
  Pure3Params(double a1, double a2, double a3);
  double a1, a2, a3;

  double operator[](int k) const { return k == 0 ? a1 : (k == 1 ? a2 : a3); }
};

/// Off-diagonal couplings of the pure 3-mode standard form:
/// plus[k] / minus[k] for the mode pairs (12, 13, 23).
struct Pure3Couplings {
  double plus[3];
  double minus[3];
};

// --- factories -------------------------------------------------------------

GaussianState vacuum(int n_modes);
/// (2 nbar + 1) I for one mode.
GaussianState thermal(double nbar);

/// [[cos phi, sin phi], [-sin phi, cos phi]]
SymplecticMatrix rotation(double phi);
/// diag(e^r, e^-r)
SymplecticMatrix squeeze(double r, double r_max = kDefaultMaxSqueeze);
/// Direct sum over modes of rotation(phi_out) squeeze(r) rotation(phi_in).
SymplecticMatrix gluo(const GluoParams& params);

Eigen::Matrix2d rotation2(double phi);
Eigen::Matrix2d local_symplectic2(const ModeGluo& m);
/// Inverse of local_symplectic2 for a 2x2 matrix with det 1 (SVD based).
ModeGluo decompose_local(const Eigen::Matrix2d& m);

/// Two-mode squeezer: q-block [[c, s], [s, c]], p-block [[c, -s], [-s, c]].
SymplecticMatrix two_mode_squeezer(double r, double r_max = kDefaultMaxSqueeze);
/// Symmetric three-mode squeezer.
SymplecticMatrix three_mode_squeezer(double r3, double r_max = kDefaultMaxSqueeze);

/// S3(r3) applied to vacuum.
GaussianState ghzw(double r3, double r_max = kDefaultMaxSqueeze);
/// Diagonal alpha' and couplings beta'_+- in the q and p blocks.
CovarianceMatrix ghzw_standard_form(double r3, double r_max = kDefaultMaxSqueeze);
/// Local squeezers mapping ghzw(r3) onto ghzw_standard_form(r3).
GluoParams ghzw_standard_gluo(double r3);
/// alpha'(r3) = sqrt(9 cosh^2(2 r3) - sinh^2(2 r3)) / 3
double ghzw_alpha_prime(double r3);

/// S(nbar_1, ..., nbar_N) inputs through an N-mode symplectic.
GaussianState thermal_product(const std::vector<double>& nbars);

// --- pure 3-mode standard form ---------------------------------------------

/// Closed-form couplings for vacuum-normalized matrices.
Pure3Couplings pure3_couplings_closed_form(const Pure3Params& p);

/// Solves the purity conditions Q P = I for the six couplings by
/// Levenberg-Marquardt, seeded from the two-mode limit, then checks the
/// result against the closed form. Throws NumericalError on failure.
Pure3Couplings solve_pure3_couplings(const Pure3Params& p);

CovarianceMatrix pure3_standard_form(const Pure3Params& p);
/// Same matrix as pure3_standard_form built from the closed form only.
CovarianceMatrix pure3_standard_form_closed(const Pure3Params& p);

/// Standard form with a_i = 1 + u_j + u_k; every u >= 0 satisfies the
/// triangle condition and the couplings are exact near its boundary.
CovarianceMatrix pure3_standard_form_excess(double u1, double u2, double u3);

/// L(g) pi_sf(p) L(g)^T
CovarianceMatrix pure3_family(const Pure3Params& p, const GluoParams& g);

/// Writes a pure state of N <= 3 modes as L(g) pi_sf L(g)^T. For N = 3,
/// `a` are the standard-form mixednesses; for N = 2 `a` = {a, a}; for N = 1,
/// `a` = {1}. DomainError for mixed input; NumericalError if the
/// reconstruction misses by > 1e-7.
struct PureDecomposition {
  std::vector<double> a;
  GluoParams gluo;
};
PureDecomposition decompose_pure(const CovarianceMatrix& pure_cov);

/// Standard form of a pure N <= 3 mode state with mixednesses `a`
/// (N = 1: vacuum; N = 2: two-mode squeezed vacuum; N = 3: closed form).
CovarianceMatrix pure_standard_form(const std::vector<double>& a);

// --- q-p structure ---------------------------------------------------------

inline constexpr double kQpTol = 1e-10;

bool is_qp(const CovarianceMatrix& cov, double tol = kQpTol);
/// (sigma_q, sigma_p); DomainError unless is_qp.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> qp_split(const CovarianceMatrix& cov);

// --- mixed 3-mode standard form ---------------------------------------------

/// Returns (sigma_sf, g) with sigma_sf = L(g) sigma L(g)^T: each mode block is
/// a_i I and the (q1,p2), (q2,p1), (q3,p1) entries vanish. Throws
/// NumericalError if the zero pattern is missed by more than 1e-8.
std::pair<CovarianceMatrix, GluoParams> mixed3_standard_form(const CovarianceMatrix& cov);

/// Largest |entry| at the six q-p positions that vanish in the mixed
/// standard form (scaled by max(1, |sigma|_max)).
double standard_form_defect(const CovarianceMatrix& cov);

}  // namespace mgeof
