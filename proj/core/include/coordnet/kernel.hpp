#pragma once

#include <optional>
#include <span>
#include <vector>

namespace coordnet {

/// Multiset of non-negative time lags, in seconds.
using DeltaMultiset = std::vector<double>;

/// How the two directed lag multisets of a user pair are combined.
enum class UnionMode {
  additive,          // multiset sum: every directed lag counts once
  max_multiplicity,  // each distinct lag counted max(mult_u->v, mult_v->u) times
};

/// Decay rate (1/seconds) and truncation tolerance for the exponential kernel.
struct KernelParams {
  double beta = 0.0;
  double eps = 1e-6;

  /// Throws ContractViolation unless beta >= 0 and 0 < eps <= 1.
  void validate() const;
};

/// For every t in `from` with some t' >= t in `to`, the lag min(t') - t.
/// Both inputs must be strictly ascending (ContractViolation otherwise).
/// Linear two-pointer merge over both lists.
DeltaMultiset directed_deltas(std::span<const double> from, std::span<const double> to);

/// Combined lags of a pair: directed_deltas(u,v) and directed_deltas(v,u)
/// merged according to `mode`. Returned in ascending order.
DeltaMultiset pair_deltas(std::span<const double> tu, std::span<const double> tv,
                          UnionMode mode = UnionMode::additive);

/// e^{-beta*dt}; ContractViolation for dt < 0 or beta < 0.
double kernel_value(double dt, double beta);

/// Lag beyond which a term contributes less than eps: -ln(eps)/beta.
/// nullopt (unbounded) when beta == 0.
std::optional<double> truncation_bound(double beta, double eps);

}  // namespace coordnet
