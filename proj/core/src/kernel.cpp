#include "coordnet/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "coordnet/error.hpp"

namespace coordnet {

namespace {

void require_ascending(std::span<const double> ts, const char* which) {
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i - 1] < ts[i]))
      throw ContractViolation(std::string("timestamps of ") + which + " are not strictly ascending");
}

}  // namespace

void KernelParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ContractViolation("beta must be finite and >= 0");
  if (!(eps > 0.0 && eps <= 1.0)) throw ContractViolation("eps must lie in (0, 1]");
}

DeltaMultiset directed_deltas(std::span<const double> from, std::span<const double> to) {
  require_ascending(from, "source");
  require_ascending(to, "target");
  DeltaMultiset out;
  out.reserve(from.size());
  std::size_t j = 0;
  for (double t : from) {
    while (j < to.size() && to[j] < t) ++j;
    if (j == to.size()) break;
    out.push_back(to[j] - t);
  }
  return out;
}

DeltaMultiset pair_deltas(std::span<const double> tu, std::span<const double> tv, UnionMode mode) {
  DeltaMultiset a = directed_deltas(tu, tv);
  DeltaMultiset b = directed_deltas(tv, tu);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  DeltaMultiset out;
  if (mode == UnionMode::additive) {
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  } else {
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  }
  return out;
}

double kernel_value(double dt, double beta) {
  if (!(dt >= 0.0)) throw ContractViolation("time lag must be >= 0");
  if (!(beta >= 0.0)) throw ContractViolation("beta must be >= 0");
  if (beta == 0.0 || dt == 0.0) return 1.0;
  return std::exp(-beta * dt);
}

std::optional<double> truncation_bound(double beta, double eps) {
  KernelParams{beta, eps}.validate();
  if (beta == 0.0) return std::nullopt;
  return -std::log(eps) / beta;
}

}  // namespace coordnet
