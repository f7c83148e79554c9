#pragma once

#include "mgeof/gcore.hpp"
#include "mgeof/partitions.hpp"

#include <cmath>
#include <compare>
#include <numbers>

namespace mgeof {

/// Entropy in bits (log base 2).
struct EntropyValue {
  double bits = 0.0;

  double nats() const { return bits * std::numbers::ln2; }

  friend EntropyValue operator+(EntropyValue a, EntropyValue b) { return {a.bits + b.bits}; }
  friend auto operator<=>(const EntropyValue&, const EntropyValue&) = default;
};

/// h(x) = (x+1)/2 log2((x+1)/2) - (x-1)/2 log2((x-1)/2), h(1) = 0.
/// Arguments in [1 - 1e-6, 1] are clamped to 1; smaller ones throw DomainError.
EntropyValue h_aux(double x);

/// von Neumann entropy sum_n h(nu_n). Throws UnphysicalStateError.
EntropyValue entropy(const CovarianceMatrix& cov);

/// h(sqrt(det)) for a single mode.
EntropyValue single_mode_entropy(const CovarianceMatrix& cov);

/// 1/2 sum over blocks of the entropy of the state reduced onto each block.
EntropyValue alpha_entropy(const CovarianceMatrix& cov, const Partition& alpha);

/// alpha-entropy of entanglement; requires a pure state (DomainError otherwise).
EntropyValue alpha_eoe(const CovarianceMatrix& pure_cov, const Partition& alpha);

/// alpha_eoe at the finest partition.
EntropyValue n_mode_eoe(const CovarianceMatrix& pure_cov);

}  // namespace mgeof
