#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coordnet/graph.hpp"

namespace coordnet {

/// Disjoint, total assignment of nodes to communities. Community ids are
/// dense, starting at 0, in order of first appearance over `nodes`; two
/// partitions describing the same grouping of the same node list compare
/// equal.
class Partition {
 public:
  Partition() = default;

  /// Canonicalizes arbitrary labels. `labels.size()` must equal `nodes.size()`.
  static Partition from_labels(std::vector<std::string> nodes, const std::vector<std::uint64_t>& labels);
  static Partition singletons(std::vector<std::string> nodes);
  static Partition single_community(std::vector<std::string> nodes);

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<std::uint32_t>& assignment() const noexcept { return community_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::uint32_t community_of(NodeId n) const { return community_.at(n); }
  std::optional<std::uint32_t> community_of(const std::string& node) const;
  std::size_t community_count() const noexcept { return count_; }
  std::vector<std::vector<NodeId>> groups() const;
  std::vector<std::size_t> community_sizes() const;
  std::size_t singleton_count() const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<std::string> nodes_;
  std::vector<std::uint32_t> community_;
  std::size_t count_ = 0;
};

struct ModularityScore {
  double value = 0.0;
  bool degenerate = false;  // graph has no edge weight; value is 0 by convention
};

/// Weighted Newman-Girvan modularity with resolution `gamma`.
/// The partition must cover exactly g's node list (ContractViolation otherwise).
ModularityScore modularity(const LayerGraph& g, const Partition& p, double gamma = 1.0);

enum class Method {
  leiden,   // local moving + well-connected refinement + aggregation
  louvain,  // local moving + aggregation
};

struct ClusteringOptions {
  double gamma = 1.0;
  std::uint64_t seed = 0;
  Method method = Method::leiden;
  /// Leiden refinement temperature, in modularity units.
  double randomness = 0.01;
};

/// Modularity-maximizing communities. Deterministic for a fixed seed. For
/// the Leiden method the result is move-stable: relocating any single node
/// to another community (or a new one) does not increase modularity.
/// Isolated nodes end up as singletons.
Partition detect_communities(const LayerGraph& g, const ClusteringOptions& options = {});

/// Node-aligned layers over one user universe with categorical coupling.
struct MultiplexNetwork {
  std::vector<std::string> universe;
  std::vector<LayerGraph> layers;
  double omega = 1.0;  // inter-layer coupling, >= 0
  double gamma = 1.0;  // resolution, >= 0

  /// ContractViolation unless every layer's nodes equal `universe`, action
  /// types are pairwise distinct and omega, gamma >= 0.
  void validate() const;
};

struct MultisliceModularity {
  double value = 0.0;        // full multislice Q, 2mu includes the coupling mass
  double intra_layer = 0.0;  // sum over layers of sum_ij B^s_ij delta, over sum_s 2m_s
  double coupling = 0.0;     // node-aligned coupling contribution to `value` (constant)
  bool degenerate = false;   // no intra-layer edge weight
};

MultisliceModularity multislice_modularity(const MultiplexNetwork& mx, const Partition& p, double gamma, double omega);
inline MultisliceModularity multislice_modularity(const MultiplexNetwork& mx, const Partition& p) {
  return multislice_modularity(mx, p, mx.gamma, mx.omega);
}

/// Node-aligned partition (one community per user across all layers) that
/// locally maximizes multislice modularity. With a single layer this is
/// exactly detect_communities on that layer.
Partition cluster_multiplex(const MultiplexNetwork& mx, std::uint64_t seed, Method method = Method::leiden);

/// CSV `user,community`.
void write_partition_csv(std::ostream& out, const Partition& p);
/// Reads `user,community` CSV; the node order is the file order.
Partition read_partition_csv(std::istream& in);

}  // namespace coordnet
