#pragma once

// Gaussian entanglement of formation: the minimum of E_alpha(pi) over pure
// covariance matrices pi with sigma - pi >= 0, for mixed states of <= 3 modes.

#include "mgeof/entropy.hpp"
#include "mgeof/gcore.hpp"
#include "mgeof/partitions.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mgeof {

enum class OptMode { general12, qp6, automatic };

std::string_view to_string(OptMode mode);
/// "general12" | "qp6" | "auto"; std::invalid_argument otherwise.
OptMode parse_opt_mode(std::string_view text);

struct OptimizationConfig {
  int restarts = 32;
  int max_evals = 20'000;  // per restart
  // Scaled by max(1, |sigma|_max) inside the optimizers.
  double feasibility_tol = 1e-9;
  double value_tol = 1e-4;
  std::uint64_t rng_seed = 0x6d67656f66ULL;
  OptMode mode = OptMode::automatic;
  int grid_steps = 9;
  int threads = 1;
  // Run on the mixed standard form of 3-mode inputs.
  bool standardize = false;

  /// Throws std::invalid_argument for non-positive counts or tolerances.
  void validate() const;
};

struct GeofResult {
  EntropyValue value;
  CovarianceMatrix optimal_pure;
  double residual = 0.0;  // smallest eigenvalue of sigma - optimal_pure
  long evals = 0;
  OptMode mode_used = OptMode::general12;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct Feasibility {
  bool feasible;
  double residual;
};

/// Smallest eigenvalue of sigma - pi, and whether it is >= -tol.
Feasibility feasible(const CovarianceMatrix& sigma, const CovarianceMatrix& pi, double tol);

/// alpha-entropy of a pure pi (pure within 1e-8; DomainError otherwise).
EntropyValue objective(const CovarianceMatrix& pi, const Partition& alpha);

/// Multi-start Nelder-Mead over pi = L(g) pi_sf(a) L(g)^T for N <= 3 with a
/// quadratic penalty on infeasibility. Throws OptimizationFailure when no
/// candidate within feasibility_tol was seen.
GeofResult geof_general(const GaussianState& sigma, const Partition& alpha, const OptimizationConfig& cfg);

/// q-p path: pi = X + X^-1 with sigma_p^-1 <= X <= sigma_q. DomainError for
/// non-q-p input.
GeofResult geof_qp(const GaussianState& sigma, const Partition& alpha, const OptimizationConfig& cfg);

/// Pure input: alpha_eoe directly. Single-block partitions: 0. Otherwise per
/// cfg.mode; in auto mode q-p states run both paths and keep the smaller.
/// Mixed input with N > 3 throws UnsupportedSizeError.
GeofResult geof(const GaussianState& sigma, const Partition& alpha, const OptimizationConfig& cfg);

struct GridResult {
  EntropyValue value;  // +inf bits when nothing feasible was found
  bool found_feasible = false;
  bool partial = false;  // budget ran out before the grid was exhausted
  long points = 0;
};

/// Exhaustive scan with `steps` points per axis. qp6 scans the three Euler
/// angles and three interval weights; general12 scans a_i in [1, a_max],
/// phases in [0, 2pi) and squeezes in [-r_b, r_b].
GridResult grid_oracle(const GaussianState& sigma, const Partition& alpha, int steps, OptMode mode,
                       long max_points = 20'000'000);

enum class Scenario { one_thermal, all_thermal };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view text);

struct SweepRow {
  double nbar;
  GeofResult result;
};

/// S3(r3) applied to thermal inputs (nbar, 0, 0) or (nbar, nbar, nbar).
GaussianState scenario_state(Scenario s, double r3, double nbar);

std::vector<SweepRow> sweep_nbar(Scenario s, double r3, const std::vector<double>& nbars, const Partition& alpha,
                                 const OptimizationConfig& cfg);

}  // namespace mgeof
