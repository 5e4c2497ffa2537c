#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace coordnet {

using NodeId = std::uint32_t;

struct WeightedEdge {
  NodeId u = 0;  // u < v
  NodeId v = 0;
  double weight = 0.0;

  bool operator==(const WeightedEdge&) const = default;
};

/// Weighted undirected user graph for one action type (one multiplex layer).
/// Every user of the universe is a node; users without co-actions are
/// isolates. No self-loops, all weights > 0, edges sorted by (u, v).
struct LayerGraph {
  std::string action_type;
  double beta = 0.0;  // decay rate the weights were built with, 1/seconds
  std::vector<std::string> nodes;
  std::vector<WeightedEdge> edges;

  std::size_t node_count() const noexcept { return nodes.size(); }
  double total_weight() const noexcept;
  std::optional<NodeId> index_of(const std::string& name) const;
  /// Weight of {u, v}; 0 when absent.
  double weight(NodeId u, NodeId v) const;
  double weight(const std::string& u, const std::string& v) const;

  /// Builds a graph from an unordered edge list: orients u < v, merges
  /// parallel edges by summation, drops non-positive weights. Self-loops
  /// raise ContractViolation.
  static LayerGraph from_edges(std::vector<std::string> nodes, std::vector<WeightedEdge> edges,
                               std::string action_type = {}, double beta = 0.0);
};

void write_graphml(std::ostream& out, const LayerGraph& g);
/// Header `u,v,weight`, node names, one row per edge.
void write_edge_csv(std::ostream& out, const LayerGraph& g);
/// Reads `u,v,weight` over the given node list. ParseError on malformed rows,
/// ValidationError on unknown nodes.
LayerGraph read_edge_csv(std::istream& in, std::vector<std::string> nodes, std::string action_type, double beta);

}  // namespace coordnet
