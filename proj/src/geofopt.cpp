#include "mgeof/geofopt.hpp"

#include "mgeof/errors.hpp"
#include "mgeof/states.hpp"

#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <numbers>
#include <random>
#include <thread>

namespace mgeof {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Substitute for non-finite or throwing objective evaluations.
constexpr double kRejected = 1e30;

// --- partition bookkeeping ------------------------------------------------------

// For a pure state of N <= 3 modes every block, or its complement, is a single
// mode (or the whole system), so E_alpha is half a sum of h(a_k) terms.
class BlockRule {
 public:
  BlockRule(const Partition& alpha, int n_modes) {
    if (alpha.n_modes() != n_modes) {
      throw std::invalid_argument(
          fmt::format("partition covers {} modes, state has {}", alpha.n_modes(), n_modes));
    }
    for (const auto& block : alpha.blocks()) {
      const int size = static_cast<int>(block.size());
      if (size == n_modes) continue;
      if (size == 1) {
        modes_.push_back(block[0]);
      } else if (size == n_modes - 1) {
        int missing = 0;
        while (std::find(block.begin(), block.end(), missing) != block.end()) ++missing;
        modes_.push_back(missing);
      } else {
        throw UnsupportedSizeError("fast objective needs blocks of size 1 or N-1");
      }
    }
  }

  // nu[k]: single-mode symplectic eigenvalue of the pure candidate.
  double operator()(const double* nu) const {
    double total = 0.0;
    for (int k : modes_) total += h_aux(std::max(1.0, nu[k])).bits;
    return 0.5 * total;
  }

 private:
  std::vector<int> modes_;
};

bool single_block(const Partition& alpha) {
  return alpha.blocks().size() == 1;
}

// --- Nelder-Mead via GSL -------------------------------------------------------

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct NmThunk {
  const Objective* f;
  long evals = 0;
  Eigen::VectorXd buf;
};

double nm_callback(const gsl_vector* v, void* params) {
  auto* t = static_cast<NmThunk*>(params);
  for (Eigen::Index i = 0; i < t->buf.size(); ++i) t->buf(i) = gsl_vector_get(v, static_cast<size_t>(i));
  ++t->evals;
  double y;
  try {
    y = (*t->f)(t->buf);
  } catch (const std::exception&) {
    y = kRejected;
  }
  return std::isfinite(y) ? y : kRejected;
}

struct NmOutcome {
  Eigen::VectorXd x;
  double f;
  long evals;
};

NmOutcome nelder_mead(const Objective& f, const Eigen::VectorXd& x0, double step, long budget) {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });

  const auto n = static_cast<size_t>(x0.size());
  NmThunk thunk{&f, 0, Eigen::VectorXd(x0.size())};
  gsl_multimin_function fn{&nm_callback, n, &thunk};

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> steps(gsl_vector_alloc(n), &gsl_vector_free);
  for (size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, x0(static_cast<Eigen::Index>(i)));
  gsl_vector_set_all(steps.get(), step);

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
  if (gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), steps.get()) != GSL_SUCCESS) {
    return {x0, f(x0), thunk.evals + 1};
  }
  while (thunk.evals < budget) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-11) == GSL_SUCCESS) break;
  }
  Eigen::VectorXd out(x0.size());
  const gsl_vector* best = gsl_multimin_fminimizer_x(s.get());
  for (size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = gsl_vector_get(best, i);
  return {out, gsl_multimin_fminimizer_minimum(s.get()), thunk.evals};
}

// --- shared restart machinery --------------------------------------------------

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct Candidate {
  double value = kInf;
  double residual = -kInf;
  Eigen::MatrixXd pi;  // empty until something feasible is seen
  Eigen::VectorXd x;   // parameters of pi, where the family has them
  long evals = 0;

  bool found() const { return pi.size() > 0; }
};

// Strictly better: smaller value, then smaller infeasibility.
bool better(double value, double residual, const Candidate& c) {
  if (!c.found()) return true;
  if (value != c.value) return value < c.value;
  return std::max(0.0, -residual) < std::max(0.0, -c.residual);
}

std::mt19937_64 restart_stream(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  return std::mt19937_64(seq);
}

// Runs body(i) for i in [0, count), possibly on several threads. Results are
// written by index so the reduction does not depend on scheduling.
void for_each_restart(int count, int threads, const std::function<void(int)>& body) {
  const int workers = std::clamp(threads, 1, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

GeofResult reduce_restarts(const std::vector<Candidate>& runs, const CovarianceMatrix& sigma, const Partition& alpha,
                           const OptimizationConfig& cfg, OptMode mode) {
  int best = -1;
  long evals = 0;
  for (int i = 0; i < static_cast<int>(runs.size()); ++i) {
    evals += runs[i].evals;
    if (!runs[i].found()) continue;
    if (best < 0 || better(runs[i].value, runs[i].residual, runs[best])) best = i;
  }
  if (best < 0) {
    double worst = -kInf;
    for (const auto& r : runs) worst = std::max(worst, r.residual);
    throw OptimizationFailure(fmt::format("no feasible decomposition found in {} restarts", runs.size()), worst);
  }
  int agreeing = 0;
  for (const auto& r : runs) {
    if (r.found() && r.value <= runs[best].value + cfg.value_tol) ++agreeing;
  }
  CovarianceMatrix pi(runs[best].pi);
  const auto feas = feasible(sigma, pi, cfg.feasibility_tol);
  GeofResult result{objective(pi, alpha), pi, feas.residual, evals, mode,
                    agreeing >= std::min(2, cfg.restarts), {}};
  if (!feas.feasible) {
    result.warnings.push_back(fmt::format("optimal point violates feasibility by {:.3e}", -feas.residual));
  }
  return result;
}

// feasibility_tol is relative to the largest entry of sigma: the Williamson
// point is exact only to rounding of that size.
OptimizationConfig scaled_to(const OptimizationConfig& cfg, const CovarianceMatrix& sigma) {
  OptimizationConfig out = cfg;
  out.feasibility_tol *= std::max(1.0, sigma.matrix().cwiseAbs().maxCoeff());
  return out;
}

void check_input(const CovarianceMatrix& cov, int max_modes) {
  if (cov.n_modes() > max_modes) {
    throw UnsupportedSizeError(
        fmt::format("mixed-state GEoF is implemented for up to {} modes, got {}", max_modes, cov.n_modes()));
  }
  const auto diag = validate_physical(cov);
  if (!diag.physical) {
    throw UnphysicalStateError(fmt::format("unphysical covariance matrix (smallest nu = {})", diag.worst_nu),
                               diag.worst_nu);
  }
}

// --- general12 family ----------------------------------------------------------

// Candidates live in the Williamson frame sigma = S diag(nu, nu) S^T:
// pi = S (pi' + I) S^T, where pi' is a pure state on the Williamson modes with
// nu > 1 and I covers the rest. Any pure pi <= sigma has this form, because
// pi' <= diag(nu, nu) pins the nu = 1 modes to vacuum; this keeps the search
// full-dimensional when sigma has unit symplectic eigenvalues.
//
// Parameter layout: mixedness coordinates of pi' (3 for three free modes, 1
// for two, none for one) followed by (phi_in, r, phi_out) per free mode.
class GeneralFamily {
 public:
  GeneralFamily(const CovarianceMatrix& sigma, const Partition& alpha)
      : sigma_(sigma.matrix()), n_(sigma.n_modes()), rule_(alpha, n_) {
    const auto w = williamson_decomposition(sigma);
    s_ = w.symplectic.matrix();
    k_ = static_cast<int>(std::count_if(w.nu.begin(), w.nu.end(), [](double nu) { return nu > 1.0 + kPurityTol; }));
    a_max_ = std::max(1.0, w.nu.front());
    r_bound_ = 0.5 * std::log(a_max_);
  }

  int n_modes() const { return n_; }
  int n_free() const { return k_; }
  int n_mix() const { return k_ == 3 ? 3 : (k_ == 2 ? 1 : 0); }
  int dim() const { return n_mix() + 3 * k_; }
  double a_max() const { return a_max_; }
  double r_bound() const { return r_bound_; }

  // Standard form of pi' at x. For three free modes a_i = 1 + u_j + u_k with
  // u_j = x_j^2 capped at a_max - 1.
  CovarianceMatrix standard_form(const Eigen::VectorXd& x) const {
    const double cap = a_max_ - 1.0;
    if (k_ == 3) {
      return pure3_standard_form_excess(std::min(x(0) * x(0), cap), std::min(x(1) * x(1), cap),
                                        std::min(x(2) * x(2), cap));
    }
    if (k_ == 2) {
      const double a = 1 + std::min(x(0) * x(0), cap);
      return pure_standard_form({a, a});
    }
    return pure_standard_form(std::vector<double>(k_, 1.0));
  }

  ModeGluo mode(const Eigen::VectorXd& x, int j) const {
    const int o = n_mix() + 3 * j;
    return {x(o), std::clamp(x(o + 1), -r_bound_, r_bound_), x(o + 2)};
  }

  // nu: single-mode symplectic eigenvalues of the returned pi.
  Eigen::MatrixXd pure(const std::vector<double>& a, const std::vector<ModeGluo>& modes, double* nu) const {
    return pure(k_ > 0 ? pure_standard_form(a) : CovarianceMatrix::vacuum(1), modes, nu);
  }

  Eigen::MatrixXd pure(const CovarianceMatrix& sf, const std::vector<ModeGluo>& modes, double* nu) const {
    Eigen::MatrixXd frame = Eigen::MatrixXd::Identity(2 * n_, 2 * n_);
    if (k_ > 0) {
      std::vector<Eigen::Matrix2d> local(k_);
      for (int j = 0; j < k_; ++j) local[j] = local_symplectic2(modes[j]);
      const Eigen::MatrixXd l = embed_local(local);
      const Eigen::MatrixXd inner = l * sf.matrix() * l.transpose();
      frame.topLeftCorner(k_, k_) = inner.topLeftCorner(k_, k_);
      frame.block(0, n_, k_, k_) = inner.topRightCorner(k_, k_);
      frame.block(n_, 0, k_, k_) = inner.bottomLeftCorner(k_, k_);
      frame.block(n_, n_, k_, k_) = inner.bottomRightCorner(k_, k_);
    }
    Eigen::MatrixXd pi = s_ * frame * s_.transpose();
    pi = 0.5 * (pi + pi.transpose());
    for (int m = 0; m < n_; ++m) {
      nu[m] = std::sqrt(std::max(0.0, pi(m, m) * pi(m + n_, m + n_) - pi(m, m + n_) * pi(m + n_, m)));
    }
    return pi;
  }

  Eigen::MatrixXd pure(const Eigen::VectorXd& x, double* nu) const {
    std::vector<ModeGluo> modes(k_);
    for (int j = 0; j < k_; ++j) modes[j] = mode(x, j);
    return pure(k_ > 0 ? standard_form(x) : CovarianceMatrix::vacuum(1), modes, nu);
  }

  double value(const double* nu) const { return rule_(nu); }
  double residual(const Eigen::MatrixXd& pi) const { return min_eigenvalue(sigma_ - pi); }

  // Smallest eigenvalue of sigma - pi and the sum of its squared negative
  // eigenvalues.
  std::pair<double, double> violation(const Eigen::MatrixXd& pi) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_ - pi, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double sq = 0.0;
    for (Eigen::Index i = 0; i < ev.size() && ev(i) < 0.0; ++i) sq += ev(i) * ev(i);
    return {ev(0), sq};
  }

 private:
  Eigen::MatrixXd sigma_;
  int n_;
  BlockRule rule_;
  Eigen::MatrixXd s_;
  int k_ = 0;
  double a_max_ = 1.0;
  double r_bound_ = 0.0;
};

constexpr double kPenaltyStages[] = {1e1, 1e3, 1e5, 1e7, 1e9, 1e11};

// Penalty stages with escalating lambda from x, then restoration and repair.
Candidate descend_general(const GeneralFamily& fam, Eigen::VectorXd x, double step, const OptimizationConfig& cfg) {
  Candidate best;
  Eigen::VectorXd best_x;
  double nu[3];
  double lambda = kPenaltyStages[0];
  bool restoring = false;
  const Objective penalized = [&](const Eigen::VectorXd& p) {
    const Eigen::MatrixXd pi = fam.pure(p, nu);
    const auto [res, viol_sq] = fam.violation(pi);
    const double value = fam.value(nu);
    if (res >= -cfg.feasibility_tol && better(value, res, best)) {
      best.value = value;
      best.residual = res;
      best.pi = pi;
      best_x = p;
    }
    return restoring ? std::sqrt(viol_sq) : value + lambda * viol_sq;
  };

  // A share of the budget is kept for restoring feasibility at the end.
  const long restore_budget = cfg.max_evals / 8;
  const long stage_budget =
      std::max<long>(10L * fam.dim(), (cfg.max_evals - restore_budget) / std::size(kPenaltyStages));
  long evals = 0;
  for (double stage_lambda : kPenaltyStages) {
    lambda = stage_lambda;
    // A collapsed simplex stalls on the curved feasibility boundary, so the
    // stage re-initializes it around its own optimum until progress stops.
    const long stage_end = std::min(evals + stage_budget, cfg.max_evals - restore_budget);
    double f_prev = kInf;
    while (evals < stage_end) {
      const auto out = nelder_mead(penalized, x, step, stage_end - evals);
      evals += out.evals;
      x = out.x;
      if (!(out.f < f_prev - 1e-12)) break;
      f_prev = out.f;
    }
    step = std::max(0.02, 0.5 * step);
    if (evals >= cfg.max_evals - restore_budget) break;
  }

  // Restoration: minimize the violation alone from the penalized optimum. The
  // feasible set can be thin (rank-deficient sigma - pi), which the penalty
  // stages approach but rarely enter within feasibility_tol.
  if (fam.residual(fam.pure(x, nu)) < -cfg.feasibility_tol && evals < cfg.max_evals) {
    restoring = true;
    const auto out = nelder_mead(penalized, x, 1e-3, cfg.max_evals - evals);
    evals += out.evals;
    if (fam.residual(fam.pure(out.x, nu)) >= -cfg.feasibility_tol) x = out.x;
    restoring = false;
  }

  // Repair: walk from the best feasible point towards the final penalized
  // point and keep the last feasible position.
  if (best.found() && (x - best_x).norm() > 0.0) {
    const double final_res = fam.residual(fam.pure(x, nu));
    if (final_res < -cfg.feasibility_tol) {
      const Eigen::VectorXd from = best_x;
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Eigen::VectorXd p = from + mid * (x - from);
        ++evals;
        if (fam.residual(fam.pure(p, nu)) >= -cfg.feasibility_tol) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      ++evals;
      penalized(from + lo * (x - from));
    }
  }
  best.evals = evals;
  best.x = best_x;
  return best;
}

Candidate run_general_restart(const GeneralFamily& fam, int restart, const OptimizationConfig& cfg) {
  auto rng = restart_stream(cfg.rng_seed, restart);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // x = 0 is the Williamson point pi = S S^T, which is always feasible.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(fam.dim());
  if (fam.dim() == 0) {
    // Pure sigma: the Williamson point is the only candidate.
    double nu[3];
    Candidate only;
    only.pi = fam.pure(x, nu);
    only.value = fam.value(nu);
    only.residual = fam.residual(only.pi);
    only.evals = 1;
    return only;
  }
  if (restart > 0 && restart % 2 == 0) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += 0.3 * gauss(rng);
  } else if (restart % 2 == 1) {
    const double zmax = std::sqrt(fam.a_max() - 1.0);
    for (int i = 0; i < fam.n_mix(); ++i) x(i) = zmax * unit(rng) / (fam.n_free() == 3 ? 2.0 : 1.0);
    for (int k = 0; k < fam.n_free(); ++k) {
      const int o = fam.n_mix() + 3 * k;
      x(o) = kTwoPi * unit(rng);
      x(o + 1) = fam.r_bound() * (2.0 * unit(rng) - 1.0);
      x(o + 2) = kTwoPi * unit(rng);
    }
  }
  return descend_general(fam, x, 0.5, cfg);
}


// --- qp6 family ------------------------------------------------------------------

Eigen::Matrix3d euler_zyz(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(c, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// X = sigma_p^-1 + D^1/2 Q diag(c) Q^T D^1/2 with D = sigma_q - sigma_p^-1 and
// c in [0, 1]^N spans exactly the interval sigma_p^-1 <= X <= sigma_q, so
// every candidate X + X^-1 is feasible. Parameters: rotation angles (3 for
// N = 3, 1 for N = 2) then one weight angle w per mode with c = sin^2 w.
class QpFamily {
 public:
  QpFamily(const CovarianceMatrix& sigma, const Partition& alpha) : n_(sigma.n_modes()), rule_(alpha, n_) {
    auto [sq, sp] = qp_split(sigma);
    sigma_ = sigma.matrix();
    p_inv_ = sp.llt().solve(Eigen::MatrixXd::Identity(n_, n_));
    p_inv_ = 0.5 * (p_inv_ + p_inv_.transpose());
    d_half_ = psd_sqrt(sq - p_inv_);
  }

  int n_modes() const { return n_; }
  int n_angles() const { return n_ == 3 ? 3 : (n_ == 2 ? 1 : 0); }
  int dim() const { return n_angles() + n_; }

  Eigen::MatrixXd rotation(const Eigen::VectorXd& x) const {
    if (n_ == 3) return euler_zyz(x(0), x(1), x(2));
    if (n_ == 2) {
      Eigen::Matrix2d r;
      r << std::cos(x(0)), -std::sin(x(0)), std::sin(x(0)), std::cos(x(0));
      return r;
    }
    return Eigen::MatrixXd::Identity(1, 1);
  }

  Eigen::MatrixXd x_matrix(const Eigen::MatrixXd& q, const Eigen::VectorXd& c) const {
    const Eigen::MatrixXd inner = q * c.asDiagonal() * q.transpose();
    Eigen::MatrixXd x = p_inv_ + d_half_ * inner * d_half_;
    return 0.5 * (x + x.transpose());
  }

  Eigen::MatrixXd x_matrix(const Eigen::VectorXd& p) const {
    Eigen::VectorXd c(n_);
    for (int k = 0; k < n_; ++k) {
      const double s = std::sin(p(n_angles() + k));
      c(k) = s * s;
    }
    return x_matrix(rotation(p), c);
  }

  // Value and the pure candidate X + X^-1.
  double value(const Eigen::MatrixXd& x, Eigen::MatrixXd* pi = nullptr) const {
    Eigen::MatrixXd x_inv = x.llt().solve(Eigen::MatrixXd::Identity(n_, n_));
    x_inv = 0.5 * (x_inv + x_inv.transpose());
    double nu[3];
    for (int k = 0; k < n_; ++k) nu[k] = std::sqrt(x(k, k) * x_inv(k, k));
    if (pi) {
      *pi = Eigen::MatrixXd::Zero(2 * n_, 2 * n_);
      pi->topLeftCorner(n_, n_) = x;
      pi->bottomRightCorner(n_, n_) = x_inv;
    }
    return rule_(nu);
  }

  double residual(const Eigen::MatrixXd& pi) const { return min_eigenvalue(sigma_ - pi); }

 private:
  int n_;
  BlockRule rule_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd p_inv_;
  Eigen::MatrixXd d_half_;
};

Candidate run_qp_restart(const QpFamily& fam, int restart, const OptimizationConfig& cfg) {
  auto rng = restart_stream(cfg.rng_seed, restart);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::VectorXd x(fam.dim());
  if (restart == 0) {
    x.head(fam.n_angles()).setZero();
    x.tail(fam.n_modes()).setConstant(0.25 * std::numbers::pi);
  } else {
    for (int i = 0; i < fam.n_angles(); ++i) x(i) = kTwoPi * unit(rng);
    for (int k = 0; k < fam.n_modes(); ++k) x(fam.n_angles() + k) = 0.5 * std::numbers::pi * unit(rng);
  }

  const Objective f = [&](const Eigen::VectorXd& p) { return fam.value(fam.x_matrix(p)); };
  long evals = 0;
  double step = 0.5;
  // Restarting the simplex around its own optimum guards against collapse.
  for (int round = 0; round < 3 && evals < cfg.max_evals; ++round) {
    const auto out = nelder_mead(f, x, step, cfg.max_evals - evals);
    evals += out.evals;
    x = out.x;
    step *= 0.2;
  }

  Candidate c;
  Eigen::MatrixXd pi;
  c.value = fam.value(fam.x_matrix(x), &pi);
  c.residual = fam.residual(pi);
  c.pi = pi;
  c.evals = evals + 1;
  if (c.residual < -cfg.feasibility_tol) c.pi.resize(0, 0);
  return c;
}

GeofResult williamson_only(const CovarianceMatrix& sigma, const Partition& alpha, OptMode mode) {
  CovarianceMatrix pi = williamson_pure_part(sigma);
  const double res = min_eigenvalue(sigma.matrix() - pi.matrix());
  return {alpha_entropy(pi, alpha), pi, res, 0, mode, true, {}};
}

}  // namespace

// --- public API -------------------------------------------------------------

std::string_view to_string(OptMode mode) {
  switch (mode) {
    case OptMode::general12:
      return "general12";
    case OptMode::qp6:
      return "qp6";
    case OptMode::automatic:
      return "auto";
  }
  return "?";
}

OptMode parse_opt_mode(std::string_view text) {
  if (text == "general12") return OptMode::general12;
  if (text == "qp6") return OptMode::qp6;
  if (text == "auto") return OptMode::automatic;
  throw std::invalid_argument(fmt::format("unknown optimizer mode '{}' (general12, qp6, auto)", text));
}

std::string_view to_string(Scenario s) {
  return s == Scenario::one_thermal ? "one_thermal" : "all_thermal";
}

Scenario parse_scenario(std::string_view text) {
  if (text == "one_thermal") return Scenario::one_thermal;
  if (text == "all_thermal") return Scenario::all_thermal;
  throw std::invalid_argument(fmt::format("unknown scenario '{}' (one_thermal, all_thermal)", text));
}

void OptimizationConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (max_evals < 1) throw std::invalid_argument("max_evals must be >= 1");
  if (!(feasibility_tol > 0.0)) throw std::invalid_argument("feasibility_tol must be positive");
  if (!(value_tol > 0.0)) throw std::invalid_argument("value_tol must be positive");
  if (grid_steps < 1) throw std::invalid_argument("grid_steps must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

Feasibility feasible(const CovarianceMatrix& sigma, const CovarianceMatrix& pi, double tol) {
  if (sigma.dim() != pi.dim()) {
    throw std::invalid_argument(fmt::format("dimension mismatch: {} vs {}", sigma.dim(), pi.dim()));
  }
  const double res = min_eigenvalue(sigma.matrix() - pi.matrix());
  return {res >= -tol, res};
}

EntropyValue objective(const CovarianceMatrix& pi, const Partition& alpha) {
  if (!is_pure(pi, 1e-8)) throw DomainError("objective requires a pure candidate");
  return alpha_entropy(pi, alpha);
}

GeofResult geof_general(const GaussianState& sigma, const Partition& alpha, const OptimizationConfig& user_cfg) {
  user_cfg.validate();
  const OptimizationConfig cfg = scaled_to(user_cfg, sigma.cov);
  check_input(sigma.cov, 3);
  if (single_block(alpha)) {
    if (alpha.n_modes() != sigma.n_modes()) throw std::invalid_argument("partition/mode count mismatch");
    return williamson_only(sigma.cov, alpha, OptMode::general12);
  }

  CovarianceMatrix work = sigma.cov;
  std::optional<SymplecticMatrix> to_standard;
  if (cfg.standardize && sigma.n_modes() == 3) {
    auto [sf, g] = mixed3_standard_form(sigma.cov);
    work = sf;
    to_standard = gluo(g);
  }

  const GeneralFamily fam(work, alpha);
  std::vector<Candidate> runs(cfg.restarts);
  for_each_restart(cfg.restarts, cfg.threads, [&](int i) { runs[i] = run_general_restart(fam, i, cfg); });

  // Polish the winner with a small simplex; its slot keeps the result.
  int best = -1;
  for (int i = 0; i < cfg.restarts; ++i) {
    if (runs[i].found() && (best < 0 || better(runs[i].value, runs[i].residual, runs[best]))) best = i;
  }
  for (int round = 0; best >= 0 && fam.dim() > 0 && round < 3; ++round) {
    Candidate polished = descend_general(fam, runs[best].x, 0.05, cfg);
    runs[best].evals += polished.evals;
    if (!polished.found() || !better(polished.value, polished.residual, runs[best])) break;
    const double gain = runs[best].value - polished.value;
    polished.evals = runs[best].evals;
    runs[best] = std::move(polished);
    if (gain < 0.1 * cfg.value_tol) break;
  }

  if (to_standard) {
    const Eigen::MatrixXd inv = to_standard->inverse().matrix();
    for (auto& r : runs) {
      if (r.found()) r.pi = inv * r.pi * inv.transpose();
    }
  }
  return reduce_restarts(runs, sigma.cov, alpha, cfg, OptMode::general12);
}

GeofResult geof_qp(const GaussianState& sigma, const Partition& alpha, const OptimizationConfig& user_cfg) {
  user_cfg.validate();
  const OptimizationConfig cfg = scaled_to(user_cfg, sigma.cov);
  check_input(sigma.cov, 3);
  if (!is_qp(sigma.cov)) throw DomainError("q-p optimizer requires a q-p state");
  if (single_block(alpha)) {
    if (alpha.n_modes() != sigma.n_modes()) throw std::invalid_argument("partition/mode count mismatch");
    return williamson_only(sigma.cov, alpha, OptMode::qp6);
  }
  const QpFamily fam(sigma.cov, alpha);
  std::vector<Candidate> runs(cfg.restarts);
  for_each_restart(cfg.restarts, cfg.threads, [&](int i) { runs[i] = run_qp_restart(fam, i, cfg); });
  return reduce_restarts(runs, sigma.cov, alpha, cfg, OptMode::qp6);
}

GeofResult geof(const GaussianState& sigma, const Partition& alpha, const OptimizationConfig& cfg) {
  cfg.validate();
  if (alpha.n_modes() != sigma.n_modes()) {
    throw std::invalid_argument(
        fmt::format("partition covers {} modes, state has {}", alpha.n_modes(), sigma.n_modes()));
  }
  const auto diag = validate_physical(sigma.cov);
  if (!diag.physical) {
    throw UnphysicalStateError(fmt::format("unphysical covariance matrix (smallest nu = {})", diag.worst_nu),
                               diag.worst_nu);
  }
  const OptMode reported = cfg.mode == OptMode::qp6 ? OptMode::qp6 : OptMode::general12;
  if (is_pure(sigma.cov)) {
    return {alpha_eoe(sigma.cov, alpha), sigma.cov, 0.0, 0, reported, true, {}};
  }
  if (single_block(alpha)) return williamson_only(sigma.cov, alpha, reported);
  check_input(sigma.cov, 3);

  switch (cfg.mode) {
    case OptMode::general12:
      return geof_general(sigma, alpha, cfg);
    case OptMode::qp6:
      return geof_qp(sigma, alpha, cfg);
    case OptMode::automatic:
      break;
  }
  if (!is_qp(sigma.cov)) return geof_general(sigma, alpha, cfg);

  GeofResult qp = geof_qp(sigma, alpha, cfg);
  GeofResult general = geof_general(sigma, alpha, cfg);
  const double gap = std::abs(qp.value.bits - general.value.bits);
  const long evals = qp.evals + general.evals;
  GeofResult out = general.value.bits < qp.value.bits ? std::move(general) : std::move(qp);
  out.evals = evals;
  if (gap > 3.0 * cfg.value_tol) {
    out.warnings.push_back(fmt::format("q-p and general optimizers disagree by {:.3e} bits", gap));
  }
  return out;
}

GridResult grid_oracle(const GaussianState& sigma, const Partition& alpha, int steps, OptMode mode,
                       long max_points) {
  if (steps < 1) throw std::invalid_argument("grid steps must be >= 1");
  check_input(sigma.cov, 3);
  GridResult out;
  out.value.bits = kInf;
  if (single_block(alpha)) {
    out.value = williamson_only(sigma.cov, alpha, mode).value;
    out.found_feasible = true;
    out.points = 1;
    return out;
  }
  if (mode == OptMode::automatic) mode = is_qp(sigma.cov) ? OptMode::qp6 : OptMode::general12;

  // Axis a of the mixed-radix counter has axis_points[a] samples; sample(a, i)
  // maps an index to a coordinate.
  std::vector<int> axis_points;
  std::vector<std::function<double(int)>> sample;
  const auto periodic = [&](double period) {
    axis_points.push_back(steps);
    sample.push_back([=](int i) { return period * i / steps; });
  };
  const auto closed = [&](double lo, double hi) {
    axis_points.push_back(steps);
    sample.push_back([=](int i) { return steps == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (steps - 1); });
  };

  std::function<void(const std::vector<double>&)> visit;
  const double tol = scaled_to(OptimizationConfig{}, sigma.cov).feasibility_tol;
  std::unique_ptr<QpFamily> qp;
  std::unique_ptr<GeneralFamily> gen;
  if (mode == OptMode::qp6) {
    qp = std::make_unique<QpFamily>(sigma.cov, alpha);
    const int n = qp->n_modes();
    if (n == 3) {
      periodic(kTwoPi);
      closed(0.0, std::numbers::pi);
      periodic(std::numbers::pi);
    } else if (n == 2) {
      periodic(std::numbers::pi);
    }
    for (int k = 0; k < n; ++k) closed(0.0, 1.0);
    visit = [&, n](const std::vector<double>& v) {
      Eigen::VectorXd angles(qp->n_angles());
      for (int i = 0; i < qp->n_angles(); ++i) angles(i) = v[i];
      Eigen::VectorXd c(n);
      for (int k = 0; k < n; ++k) c(k) = v[qp->n_angles() + k];
      Eigen::MatrixXd pi;
      const double val = qp->value(qp->x_matrix(qp->rotation(angles), c), &pi);
      if (val < out.value.bits && qp->residual(pi) >= -tol) {
        out.value.bits = val;
        out.found_feasible = true;
      }
    };
  } else {
    gen = std::make_unique<GeneralFamily>(sigma.cov, alpha);
    const int k = gen->n_free();
    const int n_a = k == 3 ? 3 : (k == 2 ? 1 : 0);
    for (int j = 0; j < n_a; ++j) closed(1.0, gen->a_max());
    for (int j = 0; j < k; ++j) {
      periodic(kTwoPi);
      closed(-gen->r_bound(), gen->r_bound());
      periodic(kTwoPi);
    }
    visit = [&, k, n_a](const std::vector<double>& v) {
      std::vector<double> a;
      if (k == 3) {
        a = {v[0], v[1], v[2]};
        for (int j = 0; j < 3; ++j) {
          if (std::abs(a[(j + 1) % 3] - a[(j + 2) % 3]) > a[j] - 1.0 + 1e-12) return;
        }
      } else if (k == 2) {
        a = {v[0], v[0]};
      } else {
        a = {1.0};
      }
      std::vector<ModeGluo> modes(k);
      for (int j = 0; j < k; ++j) modes[j] = {v[n_a + 3 * j], v[n_a + 3 * j + 1], v[n_a + 3 * j + 2]};
      double nu[3];
      const Eigen::MatrixXd pi = gen->pure(a, modes, nu);
      const double val = gen->value(nu);
      if (val < out.value.bits && gen->residual(pi) >= -tol) {
        out.value.bits = val;
        out.found_feasible = true;
      }
    };
  }

  const int dims = static_cast<int>(axis_points.size());
  std::vector<int> idx(dims, 0);
  std::vector<double> coords(dims);
  while (true) {
    if (out.points >= max_points) {
      out.partial = true;
      break;
    }
    for (int d = 0; d < dims; ++d) coords[d] = sample[d](idx[d]);
    visit(coords);
    ++out.points;
    int d = 0;
    while (d < dims && ++idx[d] == axis_points[d]) idx[d++] = 0;
    if (d == dims) break;
  }
  return out;
}

GaussianState scenario_state(Scenario s, double r3, double nbar) {
  const std::vector<double> nbars =
      s == Scenario::one_thermal ? std::vector<double>{nbar, 0.0, 0.0} : std::vector<double>{nbar, nbar, nbar};
  return apply_symplectic(thermal_product(nbars), three_mode_squeezer(r3));
}

std::vector<SweepRow> sweep_nbar(Scenario s, double r3, const std::vector<double>& nbars, const Partition& alpha,
                                 const OptimizationConfig& cfg) {
  std::vector<SweepRow> rows;
  rows.reserve(nbars.size());
  for (double nbar : nbars) rows.push_back({nbar, geof(scenario_state(s, r3, nbar), alpha, cfg)});
  return rows;
}

}  // namespace mgeof
