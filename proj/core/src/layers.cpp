#include "coordnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "coordnet/csv.hpp"
#include "coordnet/error.hpp"
#include "parallel.hpp"

namespace coordnet {

namespace {

struct Contribution {
  NodeId u;  // u < v, global ids
  NodeId v;
  double weight;
};

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Per-pair kernel sums of one content key, already divided by (n_k - 1).
std::vector<Contribution> key_contributions(const ContentActivity& content, const std::vector<NodeId>& ids,
                                            double beta, std::optional<double> bound, UnionMode mode) {
  const std::size_t n = content.users.size();
  if (n < 2) return {};
  std::unordered_map<std::uint64_t, double> acc;

  if (mode == UnionMode::additive) {
    struct Stamp {
      double t;
      std::uint32_t user;
    };
    std::vector<Stamp> events;
    for (std::uint32_t i = 0; i < n; ++i)
      for (double t : content.users[i].times) events.push_back({t, i});
    std::sort(events.begin(), events.end(),
              [](const Stamp& a, const Stamp& b) { return a.t < b.t || (a.t == b.t && a.user < b.user); });

    // For each event (t, u) the first occurrence of every other user v at a
    // time >= t is the lag min{t' in T_v : t' >= t} - t of direction u->v.
    std::vector<std::size_t> seen(n, std::numeric_limits<std::size_t>::max());
    std::size_t group_start = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (i > 0 && events[i].t != events[i - 1].t) group_start = i;
      const auto [t, u] = events[i];
      std::size_t found = 0;
      for (std::size_t j = group_start; j < events.size(); ++j) {
        const double dt = events[j].t - t;
        if (bound && dt > *bound) break;
        const auto v = events[j].user;
        if (v == u || seen[v] == i) continue;
        seen[v] = i;
        acc[pair_key(u, v)] += std::exp(-beta * dt);
        if (++found == n - 1) break;
      }
    }
  } else {
    for (std::uint32_t a = 0; a < n; ++a) {
      for (std::uint32_t b = a + 1; b < n; ++b) {
        double sum = 0.0;
        for (double dt : pair_deltas(content.users[a].times, content.users[b].times, mode)) {
          if (bound && dt > *bound) continue;
          sum += std::exp(-beta * dt);
        }
        if (sum > 0.0) acc[pair_key(a, b)] += sum;
      }
    }
  }

  const double norm = static_cast<double>(n - 1);
  std::vector<Contribution> out;
  out.reserve(acc.size());
  for (const auto& [key, sum] : acc) {
    NodeId gu = ids[key >> 32];
    NodeId gv = ids[key & 0xffffffffu];
    if (gu > gv) std::swap(gu, gv);
    out.push_back({gu, gv, sum / norm});
  }
  std::sort(out.begin(), out.end(),
            [](const Contribution& a, const Contribution& b) { return std::pair{a.u, a.v} < std::pair{b.u, b.v}; });
  return out;
}

void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw ContractViolation("beta grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw ContractViolation("beta grid values must be finite and >= 0");
    if (i > 0 && !(grid[i - 1] < grid[i])) throw ContractViolation("beta grid must be strictly ascending");
  }
}

}  // namespace

LayerGraph build_layer(const ActionIndex& index, double beta, const std::vector<std::string>& universe,
                       const LayerOptions& options) {
  KernelParams{beta, options.eps}.validate();
  std::unordered_map<std::string, NodeId> id_of;
  id_of.reserve(universe.size());
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (!id_of.emplace(universe[i], static_cast<NodeId>(i)).second)
      throw ContractViolation("duplicate user '" + universe[i] + "' in universe");
  }

  std::vector<std::vector<NodeId>> key_ids(index.contents.size());
  for (std::size_t k = 0; k < index.contents.size(); ++k) {
    for (const auto& ut : index.contents[k].users) {
      auto it = id_of.find(ut.user);
      if (it == id_of.end()) throw ContractViolation("user '" + ut.user + "' is not in the universe");
      key_ids[k].push_back(it->second);
    }
  }

  const auto bound = options.truncate ? truncation_bound(beta, options.eps) : std::nullopt;
  std::vector<std::vector<Contribution>> per_key(index.contents.size());
  detail::parallel_for(index.contents.size(), options.threads, [&](std::size_t k) {
    per_key[k] = key_contributions(index.contents[k], key_ids[k], beta, bound, options.union_mode);
  });

  // Reduce in key order so the floating-point sums do not depend on threads.
  std::unordered_map<std::uint64_t, double> total;
  for (const auto& contributions : per_key)
    for (const auto& c : contributions) total[pair_key(c.u, c.v)] += c.weight;

  LayerGraph g;
  g.action_type = index.action_type;
  g.beta = beta;
  g.nodes = universe;
  g.edges.reserve(total.size());
  for (const auto& [key, w] : total)
    if (w > 0.0) g.edges.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu), w});
  std::sort(g.edges.begin(), g.edges.end(),
            [](const WeightedEdge& a, const WeightedEdge& b) { return std::pair{a.u, a.v} < std::pair{b.u, b.v}; });
  return g;
}

BetaSweepResult sweep_beta(const std::function<LayerGraph(double)>& build, std::span<const double> grid,
                           const SweepOptions& options) {
  validate_grid(grid);
  const ClusteringOptions clustering{options.gamma, options.seed, options.method};
  BetaSweepResult r;
  r.grid.assign(grid.begin(), grid.end());
  r.q_curve.assign(grid.size(), -std::numeric_limits<double>::infinity());
  detail::parallel_for(grid.size(), options.threads, [&](std::size_t i) {
    const LayerGraph g = build(grid[i]);
    if (g.total_weight() == 0.0) return;
    r.q_curve[i] = modularity(g, detect_communities(g, clustering), options.gamma).value;
  });

  const auto best = std::max_element(r.q_curve.begin(), r.q_curve.end());  // first maximum
  if (std::isinf(*best)) throw UndefinedResult("no grid value yields a layer with edge weight");
  r.star_index = static_cast<std::size_t>(best - r.q_curve.begin());
  r.beta_star = r.grid[r.star_index];
  r.q_star = *best;
  r.partition_at_star = detect_communities(build(r.beta_star), clustering);
  return r;
}

BetaSweepResult tune_beta(const ActionIndex& index, std::span<const double> grid,
                          const std::vector<std::string>& universe, const TuneOptions& options) {
  validate_grid(grid);
  if (!(options.time_unit_seconds > 0.0)) throw ContractViolation("time unit must be > 0 seconds");
  const bool evidence = std::any_of(index.contents.begin(), index.contents.end(),
                                    [](const ContentActivity& c) { return c.participants() >= 2; });
  if (!evidence)
    throw UndefinedResult("no coordination evidence: no '" + index.action_type +
                          "' content is shared by two or more users");
  auto build = [&](double beta_per_unit) {
    return build_layer(index, beta_per_unit / options.time_unit_seconds, universe, options.layer);
  };
  auto r = sweep_beta(build, grid, options.sweep);
  r.time_unit_seconds = options.time_unit_seconds;
  return r;
}

std::vector<double> make_grid(double min, double max, double step) {
  if (!(min >= 0.0) || !(step > 0.0) || !(max >= min) || !std::isfinite(max))
    throw ValidationError("beta grid requires 0 <= min <= max and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = min + static_cast<double>(i) * step;
  return grid;
}

void write_sweep_csv(std::ostream& out, const BetaSweepResult& r) {
  csv::write_row(out, {"beta", "modularity"});
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    csv::write_row(out, {csv::format_double(r.grid[i]), csv::format_double(r.q_curve[i])});
}

LayerGraph parametric_layer(const std::vector<ParametricEdge>& edges, double beta) {
  std::set<std::string> names;
  for (const auto& e : edges) {
    names.insert(e.u);
    names.insert(e.v);
  }
  std::vector<std::string> nodes(names.begin(), names.end());
  auto id = [&](const std::string& s) {
    return static_cast<NodeId>(std::lower_bound(nodes.begin(), nodes.end(), s) - nodes.begin());
  };
  std::vector<WeightedEdge> out;
  for (const auto& e : edges) out.push_back({id(e.u), id(e.v), std::exp(-e.multiplier * beta)});
  return LayerGraph::from_edges(std::move(nodes), std::move(out), "parametric", beta);
}

std::vector<ParametricEdge> read_parametric_edges(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return {};
  if (header->size() != 3 || (*header)[0] != "u" || (*header)[1] != "v" || (*header)[2] != "multiplier")
    throw ParseError(reader.record_line(), "parametric graph header must be u,v,multiplier");
  std::vector<ParametricEdge> edges;
  while (auto row = reader.next()) {
    if (row->size() != 3) throw ParseError(reader.record_line(), "expected u,v,multiplier");
    double m = 0.0;
    try {
      std::size_t used = 0;
      m = std::stod((*row)[2], &used);
      if (used != (*row)[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(reader.record_line(), "multiplier is not a number");
    }
    if (!(m >= 0.0)) throw ValidationError(reader.record_line(), "multiplier must be >= 0");
    if ((*row)[0] == (*row)[1]) throw ValidationError(reader.record_line(), "self-loop");
    edges.push_back({(*row)[0], (*row)[1], m});
  }
  return edges;
}

}  // namespace coordnet
