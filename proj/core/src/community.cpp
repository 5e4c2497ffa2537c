#include "coordnet/community.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <unordered_map>

#include "coordnet/csv.hpp"
#include "coordnet/error.hpp"
#include "coordnet/rng.hpp"

namespace coordnet {

// ---------------------------------------------------------------------------
// Partition

Partition Partition::from_labels(std::vector<std::string> nodes, const std::vector<std::uint64_t>& labels) {
  if (nodes.size() != labels.size()) throw ContractViolation("partition labels do not match node count");
  Partition p;
  p.nodes_ = std::move(nodes);
  p.community_.resize(labels.size());
  std::unordered_map<std::uint64_t, std::uint32_t> dense;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = dense.emplace(labels[i], static_cast<std::uint32_t>(dense.size()));
    p.community_[i] = it->second;
  }
  p.count_ = dense.size();
  return p;
}

Partition Partition::singletons(std::vector<std::string> nodes) {
  std::vector<std::uint64_t> labels(nodes.size());
  std::iota(labels.begin(), labels.end(), 0);
  return from_labels(std::move(nodes), labels);
}

Partition Partition::single_community(std::vector<std::string> nodes) {
  std::vector<std::uint64_t> labels(nodes.size(), 0);
  return from_labels(std::move(nodes), labels);
}

std::optional<std::uint32_t> Partition::community_of(const std::string& node) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i] == node) return community_[i];
  return std::nullopt;
}

std::vector<std::vector<NodeId>> Partition::groups() const {
  std::vector<std::vector<NodeId>> out(count_);
  for (std::size_t i = 0; i < community_.size(); ++i) out[community_[i]].push_back(static_cast<NodeId>(i));
  return out;
}

std::vector<std::size_t> Partition::community_sizes() const {
  std::vector<std::size_t> sizes(count_, 0);
  for (auto c : community_) ++sizes[c];
  return sizes;
}

std::size_t Partition::singleton_count() const {
  auto sizes = community_sizes();
  return static_cast<std::size_t>(std::count(sizes.begin(), sizes.end(), std::size_t{1}));
}

// ---------------------------------------------------------------------------
// Modularity

namespace {

void require_matching(const std::vector<std::string>& graph_nodes, const Partition& p) {
  if (p.nodes() != graph_nodes)
    throw ContractViolation("partition does not cover exactly the graph's nodes");
}

// sum_ij B_ij delta(c_i, c_j) for one layer, i.e. 2*internal - gamma*sum K_c^2 / 2m.
double layer_b_sum(const LayerGraph& g, const Partition& p, double gamma) {
  const double two_m = 2.0 * g.total_weight();
  if (two_m == 0.0) return 0.0;
  std::vector<double> strength_by_comm(p.community_count(), 0.0);
  double internal = 0.0;
  for (const auto& e : g.edges) {
    const auto cu = p.community_of(e.u);
    const auto cv = p.community_of(e.v);
    strength_by_comm[cu] += e.weight;
    strength_by_comm[cv] += e.weight;
    if (cu == cv) internal += e.weight;
  }
  double null_term = 0.0;
  for (double k : strength_by_comm) null_term += k * k;
  return 2.0 * internal - gamma * null_term / two_m;
}

}  // namespace

ModularityScore modularity(const LayerGraph& g, const Partition& p, double gamma) {
  require_matching(g.nodes, p);
  const double two_m = 2.0 * g.total_weight();
  if (two_m == 0.0) return {0.0, true};
  return {layer_b_sum(g, p, gamma) / two_m, false};
}

void MultiplexNetwork::validate() const {
  if (!(omega >= 0.0)) throw ContractViolation("omega must be >= 0");
  if (!(gamma >= 0.0)) throw ContractViolation("gamma must be >= 0");
  std::set<std::string> types;
  for (const auto& layer : layers) {
    if (layer.nodes != universe) throw ContractViolation("layer '" + layer.action_type + "' is not aligned to the universe");
    if (!types.insert(layer.action_type).second)
      throw ContractViolation("duplicate layer action type '" + layer.action_type + "'");
  }
}

MultisliceModularity multislice_modularity(const MultiplexNetwork& mx, const Partition& p, double gamma, double omega) {
  mx.validate();
  require_matching(mx.universe, p);
  double two_m_total = 0.0;
  double b_total = 0.0;
  for (const auto& layer : mx.layers) {
    two_m_total += 2.0 * layer.total_weight();
    b_total += layer_b_sum(layer, p, gamma);
  }
  if (two_m_total == 0.0) return {0.0, 0.0, 0.0, true};
  const double n = static_cast<double>(mx.universe.size());
  const double l = static_cast<double>(mx.layers.size());
  // Node-aligned partitions keep every node's copies together, so the
  // categorical coupling term sum_{i, s != r} omega is always collected.
  const double coupling_mass = n * l * (l - 1.0) * omega;
  const double two_mu = two_m_total + coupling_mass;
  MultisliceModularity out;
  out.intra_layer = b_total / two_m_total;
  out.coupling = coupling_mass / two_mu;
  out.value = (b_total + coupling_mass) / two_mu;
  return out;
}

// ---------------------------------------------------------------------------
// Leiden / Louvain over node-aligned layers

namespace {

struct CsrLayer {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> targets;
  std::vector<double> weights;
  std::vector<double> self_loop;  // internal weight folded into a node, each edge once
  std::vector<double> strength;   // weighted degree, self loops counted twice
  double two_m = 0.0;
};

struct Level {
  std::size_t n = 0;
  std::vector<CsrLayer> layers;
};

CsrLayer csr_from_edges(std::size_t n, const std::vector<WeightedEdge>& edges) {
  CsrLayer c;
  c.offsets.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++c.offsets[e.u + 1];
    ++c.offsets[e.v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) c.offsets[i + 1] += c.offsets[i];
  c.targets.resize(c.offsets[n]);
  c.weights.resize(c.offsets[n]);
  std::vector<std::size_t> fill(c.offsets.begin(), c.offsets.end() - 1);
  for (const auto& e : edges) {
    c.targets[fill[e.u]] = e.v;
    c.weights[fill[e.u]++] = e.weight;
    c.targets[fill[e.v]] = e.u;
    c.weights[fill[e.v]++] = e.weight;
  }
  c.self_loop.assign(n, 0.0);
  c.strength.assign(n, 0.0);
  for (const auto& e : edges) {
    c.strength[e.u] += e.weight;
    c.strength[e.v] += e.weight;
  }
  for (double k : c.strength) c.two_m += k;
  return c;
}

std::vector<std::uint32_t> relabel_dense(const std::vector<std::uint32_t>& labels, std::size_t* count = nullptr) {
  std::vector<std::uint32_t> map(labels.size() + 1, UINT32_MAX);
  std::vector<std::uint32_t> out(labels.size());
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& slot = map[labels[i]];
    if (slot == UINT32_MAX) slot = next++;
    out[i] = slot;
  }
  if (count) *count = next;
  return out;
}

Level aggregate(const Level& g, const std::vector<std::uint32_t>& group, std::size_t group_count) {
  Level out;
  out.n = group_count;
  out.layers.reserve(g.layers.size());
  for (const auto& layer : g.layers) {
    CsrLayer agg;
    agg.self_loop.assign(group_count, 0.0);
    agg.strength.assign(group_count, 0.0);
    agg.two_m = layer.two_m;
    std::vector<WeightedEdge> edges;
    for (std::size_t v = 0; v < g.n; ++v) {
      const auto cv = group[v];
      agg.self_loop[cv] += layer.self_loop[v];
      agg.strength[cv] += layer.strength[v];
      for (std::size_t e = layer.offsets[v]; e < layer.offsets[v + 1]; ++e) {
        const auto j = layer.targets[e];
        const auto cj = group[j];
        if (cj == cv) {
          if (v < j) agg.self_loop[cv] += layer.weights[e];
        } else if (cv < cj) {
          edges.push_back({cv, cj, layer.weights[e]});
        }
      }
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
    CsrLayer csr = csr_from_edges(group_count, merged);
    agg.offsets = std::move(csr.offsets);
    agg.targets = std::move(csr.targets);
    agg.weights = std::move(csr.weights);
    out.layers.push_back(std::move(agg));
  }
  return out;
}

class Optimizer {
 public:
  Optimizer(double gamma, double randomness, std::uint64_t seed)
      : gamma_(gamma), randomness_(randomness), rng_(mix64(seed)) {}

  std::vector<std::uint32_t> run(const Level& base, Method method) {
    std::vector<std::uint32_t> comm(base.n);
    std::iota(comm.begin(), comm.end(), 0u);
    if (base.n == 0) return comm;
    if (method == Method::louvain) return pass(base, comm, method);
    // Repeat full passes until the partition is a fixed point; the last
    // pass then made no node move at the original level.
    for (int iter = 0; iter < 64; ++iter) {
      auto next = pass(base, comm, method);
      if (next == comm) break;
      comm = std::move(next);
    }
    return comm;
  }

 private:
  double gamma_;
  double randomness_;
  Rng rng_;

  // Scratch, sized per level.
  std::vector<std::vector<double>> w_;  // [layer][community] weight from current node
  std::vector<char> touched_flag_;
  std::vector<std::uint32_t> touched_;

  void prepare(const Level& g) {
    w_.assign(g.layers.size(), std::vector<double>(g.n, 0.0));
    touched_flag_.assign(g.n, 0);
    touched_.clear();
  }

  void gather(const Level& g, std::size_t v, const std::vector<std::uint32_t>& labels,
              const std::vector<std::uint32_t>* restrict_comm = nullptr, std::uint32_t restrict_to = 0) {
    for (std::size_t s = 0; s < g.layers.size(); ++s) {
      const auto& layer = g.layers[s];
      if (layer.two_m == 0.0) continue;
      for (std::size_t e = layer.offsets[v]; e < layer.offsets[v + 1]; ++e) {
        const auto j = layer.targets[e];
        if (restrict_comm && (*restrict_comm)[j] != restrict_to) continue;
        const auto c = labels[j];
        if (!touched_flag_[c]) {
          touched_flag_[c] = 1;
          touched_.push_back(c);
        }
        w_[s][c] += layer.weights[e];
      }
    }
  }

  void clear_gather() {
    for (auto c : touched_) {
      touched_flag_[c] = 0;
      for (auto& ws : w_) ws[c] = 0.0;
    }
    touched_.clear();
  }

  static double total_strength(const Level& g, std::size_t v) {
    double k = 0.0;
    for (const auto& layer : g.layers)
      if (layer.two_m > 0.0) k += layer.strength[v];
    return k;
  }

  // Local moving phase. Returns true if any node changed community.
  bool move_nodes(const Level& g, std::vector<std::uint32_t>& comm) {
    const std::size_t n = g.n;
    const std::size_t nl = g.layers.size();
    std::vector<std::vector<double>> K(nl, std::vector<double>(n, 0.0));
    std::vector<std::uint32_t> size(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
      ++size[comm[v]];
      for (std::size_t s = 0; s < nl; ++s) K[s][comm[v]] += g.layers[s].strength[v];
    }
    std::vector<std::uint32_t> empty;
    for (std::size_t c = n; c-- > 0;)
      if (size[c] == 0) empty.push_back(static_cast<std::uint32_t>(c));

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    shuffle(order.begin(), order.end(), rng_);
    std::deque<std::uint32_t> queue(order.begin(), order.end());
    std::vector<char> queued(n, 1);

    bool moved = false;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      queued[v] = 0;
      const auto current = comm[v];
      gather(g, v, comm);

      auto score = [&](std::uint32_t c) {
        double sc = 0.0;
        for (std::size_t s = 0; s < nl; ++s) {
          const auto& layer = g.layers[s];
          if (layer.two_m == 0.0) continue;
          const double kv = layer.strength[v];
          const double kc = K[s][c] - (c == current ? kv : 0.0);
          sc += w_[s][c] - gamma_ * kv * kc / layer.two_m;
        }
        return sc;
      };

      const double stay = score(current);
      double best_score = stay;
      std::uint32_t best = current;
      bool best_is_empty = false;
      for (auto c : touched_) {
        if (c == current) continue;
        const double sc = score(c);
        if (sc > best_score) {
          best_score = sc;
          best = c;
        }
      }
      // A fresh community scores 0.
      if (size[current] > 1 && 0.0 > best_score && !empty.empty()) {
        best_score = 0.0;
        best = empty.back();
        best_is_empty = true;
      }
      clear_gather();

      const double tol = 1e-12 * total_strength(g, v);
      if (best != current && best_score > stay + tol) {
        if (best_is_empty) empty.pop_back();
        for (std::size_t s = 0; s < nl; ++s) {
          K[s][current] -= g.layers[s].strength[v];
          K[s][best] += g.layers[s].strength[v];
        }
        --size[current];
        ++size[best];
        if (size[current] == 0) empty.push_back(current);
        comm[v] = best;
        moved = true;
        for (const auto& layer : g.layers) {
          for (std::size_t e = layer.offsets[v]; e < layer.offsets[v + 1]; ++e) {
            const auto j = layer.targets[e];
            if (!queued[j] && comm[j] != best) {
              queued[j] = 1;
              queue.push_back(j);
            }
          }
        }
      }
    }
    return moved;
  }

  // Leiden refinement: merge well-connected singletons into well-connected
  // sub-communities of their community, randomized by `randomness_`.
  std::vector<std::uint32_t> refine(const Level& g, const std::vector<std::uint32_t>& comm) {
    const std::size_t n = g.n;
    const std::size_t nl = g.layers.size();
    double total_m = 0.0;
    for (const auto& layer : g.layers) total_m += layer.two_m / 2.0;

    std::vector<std::uint32_t> refined(n);
    std::iota(refined.begin(), refined.end(), 0u);
    std::vector<std::uint32_t> rsize(n, 1);
    // Per layer: total strength of each community of `comm`, strength of
    // each refined community, and weight from refined community to the rest
    // of its enclosing community.
    std::vector<std::vector<double>> KS(nl, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> rK(nl, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> rE(nl, std::vector<double>(n, 0.0));
    std::vector<std::vector<std::uint32_t>> members(n);
    for (std::size_t v = 0; v < n; ++v) {
      members[comm[v]].push_back(static_cast<std::uint32_t>(v));
      for (std::size_t s = 0; s < nl; ++s) {
        const auto& layer = g.layers[s];
        KS[s][comm[v]] += layer.strength[v];
        rK[s][v] = layer.strength[v];
        for (std::size_t e = layer.offsets[v]; e < layer.offsets[v + 1]; ++e)
          if (comm[layer.targets[e]] == comm[v]) rE[s][v] += layer.weights[e];
      }
    }
    // E(v, S - v) per node, frozen before any merge.
    const auto node_ext = rE;

    auto well_connected = [&](std::uint32_t r, std::uint32_t c) {
      double slack = 0.0;
      for (std::size_t s = 0; s < nl; ++s) {
        const auto& layer = g.layers[s];
        if (layer.two_m == 0.0) continue;
        slack += rE[s][r] - gamma_ * rK[s][r] * (KS[s][c] - rK[s][r]) / layer.two_m;
      }
      return slack >= -1e-12 * std::max(1.0, total_m);
    };

    std::vector<std::uint32_t> candidates;
    std::vector<double> gains;
    for (std::size_t c = 0; c < n; ++c) {
      auto& nodes = members[c];
      if (nodes.size() < 2) continue;
      shuffle(nodes.begin(), nodes.end(), rng_);
      for (auto v : nodes) {
        const auto own = refined[v];
        if (rsize[own] != 1) continue;
        if (!well_connected(own, static_cast<std::uint32_t>(c))) continue;

        gather(g, v, refined, &comm, static_cast<std::uint32_t>(c));
        candidates.assign(1, own);
        gains.assign(1, 0.0);
        for (auto r : touched_) {
          if (r == own || !well_connected(r, static_cast<std::uint32_t>(c))) continue;
          double gain = 0.0;
          for (std::size_t s = 0; s < nl; ++s) {
            const auto& layer = g.layers[s];
            if (layer.two_m == 0.0) continue;
            gain += w_[s][r] - gamma_ * layer.strength[v] * rK[s][r] / layer.two_m;
          }
          if (gain >= 0.0) {
            candidates.push_back(r);
            gains.push_back(gain);
          }
        }

        std::size_t pick = 0;
        if (candidates.size() > 1) {
          if (randomness_ > 0.0 && total_m > 0.0) {
            double max_gain = *std::max_element(gains.begin(), gains.end());
            std::vector<double> cumulative(gains.size());
            double acc = 0.0;
            for (std::size_t i = 0; i < gains.size(); ++i) {
              acc += std::exp((gains[i] - max_gain) / total_m / randomness_);
              cumulative[i] = acc;
            }
            const double x = uniform01(rng_) * acc;
            pick = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) -
                                            cumulative.begin());
            pick = std::min(pick, gains.size() - 1);
          } else {
            pick = static_cast<std::size_t>(std::max_element(gains.begin(), gains.end()) - gains.begin());
          }
        }
        const auto target = candidates[pick];
        if (target != own) {
          for (std::size_t s = 0; s < nl; ++s) {
            rK[s][target] += rK[s][own];
            rE[s][target] += node_ext[s][v] - 2.0 * w_[s][target];
            rK[s][own] = 0.0;
            rE[s][own] = 0.0;
          }
          rsize[target] += 1;
          rsize[own] = 0;
          refined[v] = target;
        }
        clear_gather();
      }
    }
    return refined;
  }

  std::vector<std::uint32_t> pass(const Level& base, std::vector<std::uint32_t> comm, Method method) {
    std::vector<std::uint32_t> membership(base.n);
    std::iota(membership.begin(), membership.end(), 0u);
    Level current = base;
    comm = relabel_dense(comm);
    while (true) {
      prepare(current);
      move_nodes(current, comm);
      std::size_t k = 0;
      comm = relabel_dense(comm, &k);
      if (k == current.n) break;

      std::vector<std::uint32_t> group = comm;
      std::size_t groups = k;
      if (method == Method::leiden) {
        std::size_t kr = 0;
        auto refined = relabel_dense(refine(current, comm), &kr);
        if (kr < current.n) {
          group = std::move(refined);
          groups = kr;
        }
      }
      std::vector<std::uint32_t> next_comm(groups);
      for (std::size_t v = 0; v < current.n; ++v) next_comm[group[v]] = comm[v];
      for (auto& m : membership) m = group[m];
      current = aggregate(current, group, groups);
      comm = std::move(next_comm);
    }
    std::vector<std::uint32_t> out(base.n);
    for (std::size_t i = 0; i < base.n; ++i) out[i] = comm[membership[i]];
    return relabel_dense(out);
  }
};

Partition optimize(const std::vector<std::string>& nodes, const std::vector<const LayerGraph*>& layers, double gamma,
                   std::uint64_t seed, Method method, double randomness) {
  if (!(gamma >= 0.0)) throw ContractViolation("gamma must be >= 0");
  Level base;
  base.n = nodes.size();
  for (const auto* layer : layers) base.layers.push_back(csr_from_edges(base.n, layer->edges));
  Optimizer opt(gamma, randomness, seed);
  auto labels = opt.run(base, method);
  std::vector<std::uint64_t> wide(labels.begin(), labels.end());
  return Partition::from_labels(nodes, wide);
}

}  // namespace

Partition detect_communities(const LayerGraph& g, const ClusteringOptions& options) {
  return optimize(g.nodes, {&g}, options.gamma, options.seed, options.method, options.randomness);
}

Partition cluster_multiplex(const MultiplexNetwork& mx, std::uint64_t seed, Method method) {
  mx.validate();
  if (mx.layers.empty()) throw ContractViolation("multiplex network has no layers");
  std::vector<const LayerGraph*> layers;
  for (const auto& l : mx.layers) layers.push_back(&l);
  return optimize(mx.universe, layers, mx.gamma, seed, method, ClusteringOptions{}.randomness);
}

void write_partition_csv(std::ostream& out, const Partition& p) {
  csv::write_row(out, {"user", "community"});
  for (std::size_t i = 0; i < p.size(); ++i) csv::write_row(out, {p.nodes()[i], std::to_string(p.community_of(static_cast<NodeId>(i)))});
}

Partition read_partition_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return {};
  if (header->size() < 2 || (*header)[0] != "user" || (*header)[1] != "community")
    throw ParseError(reader.record_line(), "partition header must be user,community");
  std::vector<std::string> nodes;
  std::vector<std::uint64_t> labels;
  std::set<std::string> seen;
  while (auto row = reader.next()) {
    if (row->size() < 2) throw ParseError(reader.record_line(), "expected user,community");
    if (!seen.insert((*row)[0]).second)
      throw ValidationError(reader.record_line(), "user '" + (*row)[0] + "' assigned twice");
    std::uint64_t label = 0;
    try {
      label = std::stoull((*row)[1]);
    } catch (const std::exception&) {
      throw ParseError(reader.record_line(), "community id is not a non-negative integer");
    }
    nodes.push_back((*row)[0]);
    labels.push_back(label);
  }
  return Partition::from_labels(std::move(nodes), labels);
}

}  // namespace coordnet
