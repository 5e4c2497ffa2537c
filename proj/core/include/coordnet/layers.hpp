#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "coordnet/community.hpp"
#include "coordnet/graph.hpp"
#include "coordnet/ingest.hpp"
#include "coordnet/kernel.hpp"

namespace coordnet {

struct LayerOptions {
  double eps = 1e-6;
  /// Skip lags beyond truncation_bound(beta, eps). Disable for an exact build.
  bool truncate = true;
  UnionMode union_mode = UnionMode::additive;
  /// Worker threads over content keys; results do not depend on this.
  unsigned threads = 1;
};

/// Time-aware node-normalized collaboration graph of one action type:
///
///   w_uv = sum_k sum_{dt in pair_deltas(T_u^k, T_v^k)} exp(-beta*dt) / (n_k - 1)
///
/// `beta` is in 1/seconds. Pairs are enumerated per content key only, by a
/// forward sweep over the key's time-sorted events that stops at the
/// truncation bound. `universe` must contain every user of the index; its
/// order becomes the node order.
LayerGraph build_layer(const ActionIndex& index, double beta, const std::vector<std::string>& universe,
                       const LayerOptions& options = {});

struct BetaSweepResult {
  std::vector<double> grid;     // ascending
  std::vector<double> q_curve;  // -inf where the layer has no edge weight
  double beta_star = 0.0;
  double q_star = 0.0;
  std::size_t star_index = 0;
  Partition partition_at_star;
  double time_unit_seconds = 1.0;  // grid values are per this many seconds
};

struct SweepOptions {
  double gamma = 1.0;
  std::uint64_t seed = 0;
  Method method = Method::leiden;
  unsigned threads = 1;
};

/// Modularity of the best partition found at each grid value of a
/// beta-parametrized graph family; picks the maximum, smallest beta on ties.
/// Grid points with zero total weight score -inf and are never selected.
/// Throws ContractViolation for an empty, unsorted or negative grid and
/// UndefinedResult if no grid point has edge weight.
BetaSweepResult sweep_beta(const std::function<LayerGraph(double)>& build, std::span<const double> grid,
                           const SweepOptions& options = {});

struct TuneOptions {
  LayerOptions layer;
  SweepOptions sweep;
  /// Grid values are rates per time unit; 60 means per minute.
  double time_unit_seconds = 1.0;
};

/// sweep_beta over build_layer. UndefinedResult ("no coordination evidence")
/// if no content key has two or more participants.
BetaSweepResult tune_beta(const ActionIndex& index, std::span<const double> grid,
                          const std::vector<std::string>& universe, const TuneOptions& options = {});

/// min, min+step, ..., up to and including max (within rounding).
std::vector<double> make_grid(double min, double max, double step);

/// CSV `beta,modularity` (beta in grid units).
void write_sweep_csv(std::ostream& out, const BetaSweepResult& r);

/// Edge whose weight is exp(-multiplier * beta): a graph family used to
/// study the sweep independently of event data.
struct ParametricEdge {
  std::string u;
  std::string v;
  double multiplier = 0.0;
};

/// Nodes are the sorted set of endpoints.
LayerGraph parametric_layer(const std::vector<ParametricEdge>& edges, double beta);
/// CSV `u,v,multiplier`.
std::vector<ParametricEdge> read_parametric_edges(std::istream& in);

}  // namespace coordnet
