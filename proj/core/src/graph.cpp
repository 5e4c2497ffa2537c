#include <algorithm>
#include <unordered_map>

#include "coordnet/csv.hpp"
#include "coordnet/error.hpp"
#include "coordnet/graph.hpp"

namespace coordnet {

double LayerGraph::total_weight() const noexcept {
  double m = 0.0;
  for (const auto& e : edges) m += e.weight;
  return m;
}

std::optional<NodeId> LayerGraph::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == name) return static_cast<NodeId>(i);
  return std::nullopt;
}

double LayerGraph::weight(NodeId u, NodeId v) const {
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{u, v}, [](const WeightedEdge& e, const auto& key) {
    return std::pair{e.u, e.v} < key;
  });
  return it != edges.end() && it->u == u && it->v == v ? it->weight : 0.0;
}

double LayerGraph::weight(const std::string& u, const std::string& v) const {
  auto iu = index_of(u);
  auto iv = index_of(v);
  return iu && iv ? weight(*iu, *iv) : 0.0;
}

LayerGraph LayerGraph::from_edges(std::vector<std::string> nodes, std::vector<WeightedEdge> edges,
                                  std::string action_type, double beta) {
  for (auto& e : edges) {
    if (e.u == e.v) throw ContractViolation("self-loop on node " + std::to_string(e.u));
    if (e.u >= nodes.size() || e.v >= nodes.size()) throw ContractViolation("edge endpoint out of range");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(),
            [](const WeightedEdge& a, const WeightedEdge& b) { return std::pair{a.u, a.v} < std::pair{b.u, b.v}; });
  std::vector<WeightedEdge> merged;
  for (const auto& e : edges) {
    if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v)
      merged.back().weight += e.weight;
    else
      merged.push_back(e);
  }
  std::erase_if(merged, [](const WeightedEdge& e) { return !(e.weight > 0.0); });
  LayerGraph g;
  g.action_type = std::move(action_type);
  g.beta = beta;
  g.nodes = std::move(nodes);
  g.edges = std::move(merged);
  return g;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

void write_graphml(std::ostream& out, const LayerGraph& g) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <key id=\"action_type\" for=\"graph\" attr.name=\"action_type\" attr.type=\"string\"/>\n"
      << "  <key id=\"beta\" for=\"graph\" attr.name=\"beta\" attr.type=\"double\"/>\n"
      << "  <graph id=\"" << xml_escape(g.action_type.empty() ? "layer" : g.action_type)
      << "\" edgedefault=\"undirected\">\n"
      << "    <data key=\"action_type\">" << xml_escape(g.action_type) << "</data>\n"
      << "    <data key=\"beta\">" << csv::format_double(g.beta) << "</data>\n";
  for (const auto& n : g.nodes) out << "    <node id=\"" << xml_escape(n) << "\"/>\n";
  for (const auto& e : g.edges) {
    out << "    <edge source=\"" << xml_escape(g.nodes[e.u]) << "\" target=\"" << xml_escape(g.nodes[e.v])
        << "\"><data key=\"weight\">" << csv::format_double(e.weight) << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_edge_csv(std::ostream& out, const LayerGraph& g) {
  csv::write_row(out, {"u", "v", "weight"});
  for (const auto& e : g.edges) csv::write_row(out, {g.nodes[e.u], g.nodes[e.v], csv::format_double(e.weight)});
}

LayerGraph read_edge_csv(std::istream& in, std::vector<std::string> nodes, std::string action_type, double beta) {
  std::unordered_map<std::string, NodeId> id;
  for (std::size_t i = 0; i < nodes.size(); ++i) id.emplace(nodes[i], static_cast<NodeId>(i));
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return LayerGraph::from_edges(std::move(nodes), {}, std::move(action_type), beta);
  if (*header != std::vector<std::string>{"u", "v", "weight"})
    throw ParseError(reader.record_line(), "edge list header must be u,v,weight");
  std::vector<WeightedEdge> edges;
  while (auto row = reader.next()) {
    if (row->size() != 3) throw ParseError(reader.record_line(), "expected u,v,weight");
    auto u = id.find((*row)[0]);
    auto v = id.find((*row)[1]);
    if (u == id.end() || v == id.end()) throw ValidationError(reader.record_line(), "edge endpoint is not a known user");
    double w = 0.0;
    try {
      std::size_t used = 0;
      w = std::stod((*row)[2], &used);
      if (used != (*row)[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(reader.record_line(), "weight is not a number");
    }
    edges.push_back({u->second, v->second, w});
  }
  return LayerGraph::from_edges(std::move(nodes), std::move(edges), std::move(action_type), beta);
}

}  // namespace coordnet
