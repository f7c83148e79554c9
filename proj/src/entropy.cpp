#include "mgeof/entropy.hpp"

#include "mgeof/errors.hpp"

#include <fmt/format.h>

namespace mgeof {

namespace {

constexpr double kDomainTol = 1e-6;

void require_modes(const CovarianceMatrix& cov, const Partition& alpha) {
  if (alpha.n_modes() != cov.n_modes()) {
    throw std::invalid_argument(
        fmt::format("partition covers {} modes but the state has {}", alpha.n_modes(), cov.n_modes()));
  }
}

}  // namespace

EntropyValue h_aux(double x) {
  if (!(x >= 1.0 - kDomainTol)) throw DomainError(fmt::format("h(x) requires x >= 1, got {}", x));
  if (x <= 1.0) return {0.0};
  const double plus = 0.5 * (x + 1.0);
  const double minus = 0.5 * (x - 1.0);
  return {plus * std::log2(plus) - minus * std::log2(minus)};
}

EntropyValue entropy(const CovarianceMatrix& cov) {
  const auto nus = symplectic_eigenvalues(cov);
  if (nus.back() < 1.0 - kPhysicalTol) {
    throw UnphysicalStateError(fmt::format("unphysical covariance matrix (smallest nu = {})", nus.back()), nus.back());
  }
  EntropyValue s;
  for (double nu : nus) s.bits += h_aux(std::max(nu, 1.0)).bits;
  return s;
}

EntropyValue single_mode_entropy(const CovarianceMatrix& cov) {
  if (cov.n_modes() != 1) throw std::invalid_argument("single_mode_entropy needs a 1-mode state");
  const double det = cov.matrix().determinant();
  if (det < 1.0 - kDomainTol) throw DomainError(fmt::format("single-mode determinant {} below 1", det));
  return h_aux(std::sqrt(std::max(det, 1.0)));
}

EntropyValue alpha_entropy(const CovarianceMatrix& cov, const Partition& alpha) {
  require_modes(cov, alpha);
  EntropyValue total;
  for (const auto& block : alpha.blocks()) {
    if (static_cast<int>(block.size()) == cov.n_modes()) {
      total.bits += entropy(cov).bits;
    } else {
      total.bits += entropy(partial_trace(cov, block)).bits;
    }
  }
  return {0.5 * total.bits};
}

EntropyValue alpha_eoe(const CovarianceMatrix& pure_cov, const Partition& alpha) {
  require_modes(pure_cov, alpha);
  if (!is_pure(pure_cov)) throw DomainError("entropy of entanglement requires a pure state");
  return alpha_entropy(pure_cov, alpha);
}

EntropyValue n_mode_eoe(const CovarianceMatrix& pure_cov) {
  return alpha_eoe(pure_cov, Partition::finest(pure_cov.n_modes()));
}

}  // namespace mgeof
