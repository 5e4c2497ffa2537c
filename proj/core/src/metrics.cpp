#include "coordnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "coordnet/csv.hpp"
#include "coordnet/error.hpp"
#include "coordnet/rng.hpp"
#include "parallel.hpp"

namespace coordnet {

namespace {

__extension__ typedef unsigned __int128 u128;

u128 gcd128(u128 a, u128 b) {
  while (b) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Dense cluster/class ids per node plus the binary truth.
struct Labeling {
  std::vector<std::uint32_t> cluster;
  std::size_t n_clusters = 0;
  std::vector<std::uint32_t> cls;
  std::size_t n_classes = 0;
  std::vector<char> positive;
};

Labeling labeling_of(const Partition& p, const GroundTruth& gt) {
  Labeling l;
  l.cluster = p.assignment();
  l.n_clusters = p.community_count();
  std::unordered_map<std::string, std::uint32_t> class_ids;
  for (const auto& u : p.nodes()) {
    auto [it, inserted] = class_ids.emplace(gt.class_of(u), static_cast<std::uint32_t>(class_ids.size()));
    l.cls.push_back(it->second);
    l.positive.push_back(gt.is_positive(u) ? 1 : 0);
  }
  l.n_classes = class_ids.size();
  return l;
}

struct ClusterCounts {
  std::vector<std::size_t> size;
  std::vector<std::size_t> tp;
  std::size_t positives = 0;
};

ClusterCounts counts_of(const Labeling& l) {
  ClusterCounts c;
  c.size.assign(l.n_clusters, 0);
  c.tp.assign(l.n_clusters, 0);
  for (std::size_t i = 0; i < l.cluster.size(); ++i) {
    ++c.size[l.cluster[i]];
    if (l.positive[i]) {
      ++c.tp[l.cluster[i]];
      ++c.positives;
    }
  }
  return c;
}

ClusterScores best_of(const ClusterCounts& c) {
  if (c.positives == 0) throw UndefinedResult("F1* is undefined without coordinated users");
  ClusterScores best;
  bool have = false;
  for (std::uint32_t k = 0; k < c.size.size(); ++k) {
    if (c.size[k] == 0) continue;
    const double f1 = 2.0 * static_cast<double>(c.tp[k]) / static_cast<double>(c.size[k] + c.positives);
    if (!have || f1 > best.f1 || (f1 == best.f1 && c.size[k] > best.cluster_size)) {
      have = true;
      best.f1 = f1;
      best.precision = static_cast<double>(c.tp[k]) / static_cast<double>(c.size[k]);
      best.recall = static_cast<double>(c.tp[k]) / static_cast<double>(c.positives);
      best.cluster = k;
      best.cluster_size = c.size[k];
    }
  }
  return best;
}

// sum_k tp_k^2 / n_k over non-singletons, divided by sum_k tp_k; evaluated as
// an exact fraction while it fits, so the result is the correctly rounded
// quotient.
double wp_of(const ClusterCounts& c) {
  u128 num = 0;
  u128 den = 1;
  std::uint64_t total = 0;
  bool exact = true;
  long double approx = 0.0L;
  for (std::size_t k = 0; k < c.size.size(); ++k) {
    if (c.size[k] < 2 || c.tp[k] == 0) continue;
    total += c.tp[k];
    const u128 a = static_cast<u128>(c.tp[k]) * c.tp[k];
    const u128 b = c.size[k];
    approx += static_cast<long double>(c.tp[k]) * c.tp[k] / static_cast<long double>(c.size[k]);
    if (!exact) continue;
    const u128 g = gcd128(den, b);
    const u128 lcm = den / g * b;
    if (lcm >> 62) {
      exact = false;
      continue;
    }
    num = num * (lcm / den) + a * (lcm / b);
    den = lcm;
    const u128 r = gcd128(num, den);
    num /= r;
    den /= r;
    if (num >> 62) exact = false;
  }
  if (total == 0) return 0.0;
  if (exact) {
    // num / (den * total), reduced so both sides are exactly representable.
    u128 d = den * total;
    const u128 r = gcd128(num, d);
    const u128 n = num / r;
    d /= r;
    if (n < (u128{1} << 53) && d < (u128{1} << 53)) return static_cast<double>(n) / static_cast<double>(d);
  }
  return static_cast<double>(approx / static_cast<long double>(total));
}

double entropy(const std::vector<std::size_t>& counts, double n) {
  double h = 0.0;
  for (auto c : counts)
    if (c) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  return h;
}

double homogeneity_of(const Labeling& l) {
  const std::size_t n = l.cluster.size();
  if (n == 0) return 1.0;
  std::vector<std::size_t> class_counts(l.n_classes, 0);
  for (auto c : l.cls) ++class_counts[c];
  const double nd = static_cast<double>(n);
  const double h_class = entropy(class_counts, nd);
  if (h_class == 0.0) return 1.0;
  std::vector<std::size_t> joint(l.n_clusters * l.n_classes, 0);
  std::vector<std::size_t> cluster_counts(l.n_clusters, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++joint[l.cluster[i] * l.n_classes + l.cls[i]];
    ++cluster_counts[l.cluster[i]];
  }
  // H(class | cluster) = -sum n_ck/n * ln(n_ck / n_k)
  double h_cond = 0.0;
  for (std::size_t k = 0; k < l.n_clusters; ++k)
    for (std::size_t c = 0; c < l.n_classes; ++c) {
      const auto nck = joint[k * l.n_classes + c];
      if (nck)
        h_cond -= static_cast<double>(nck) / nd *
                  std::log(static_cast<double>(nck) / static_cast<double>(cluster_counts[k]));
    }
  return 1.0 - h_cond / h_class;
}

double nmi_of(const Labeling& l) {
  const std::size_t n = l.cluster.size();
  if (n == 0) return 0.0;
  const auto c = counts_of(l);
  std::size_t joint[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = l.cluster[i];
    const int pred = 2 * c.tp[k] > c.size[k] ? 1 : 0;
    ++joint[l.positive[i] ? 1 : 0][pred];
  }
  const double nd = static_cast<double>(n);
  const std::vector<std::size_t> truth{joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]};
  const std::vector<std::size_t> pred{joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]};
  const double ht = entropy(truth, nd);
  const double hp = entropy(pred, nd);
  if (ht == 0.0 || hp == 0.0) return 0.0;
  double mi = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (joint[a][b]) {
        const double pab = static_cast<double>(joint[a][b]) / nd;
        mi += pab * std::log(pab * nd * nd / (static_cast<double>(truth[a]) * static_cast<double>(pred[b])));
      }
  return std::clamp(mi / (0.5 * (ht + hp)), 0.0, 1.0);
}

}  // namespace

ClusterScores best_cluster_scores(const Partition& p, const GroundTruth& gt) {
  return best_of(counts_of(labeling_of(p, gt)));
}

double weighted_precision(const Partition& p, const GroundTruth& gt) { return wp_of(counts_of(labeling_of(p, gt))); }

double homogeneity(const Partition& p, const GroundTruth& gt) { return homogeneity_of(labeling_of(p, gt)); }

double nmi_binarized(const Partition& p, const GroundTruth& gt) { return nmi_of(labeling_of(p, gt)); }

EvalReport evaluate(const Partition& p, const GroundTruth& gt) {
  const auto l = labeling_of(p, gt);
  const auto c = counts_of(l);
  const auto best = best_of(c);
  EvalReport r;
  r.f1_star = best.f1;
  r.precision_star = best.precision;
  r.recall_star = best.recall;
  r.best_cluster = best.cluster;
  r.homogeneity = homogeneity_of(l);
  r.weighted_precision = wp_of(c);
  r.nmi_binarized = nmi_of(l);
  r.cluster_count = p.community_count();
  r.singleton_count = p.singleton_count();
  return r;
}

EvalReport evaluate_flagged(const std::set<std::string>& flagged, const std::vector<std::string>& universe,
                            const GroundTruth& gt) {
  std::vector<std::uint64_t> labels;
  std::size_t tp = 0;
  std::size_t positives = 0;
  for (const auto& u : universe) {
    const bool f = flagged.count(u) > 0;
    labels.push_back(f ? 0 : 1);
    if (gt.is_positive(u)) {
      ++positives;
      if (f) ++tp;
    }
  }
  if (positives == 0) throw UndefinedResult("F1* is undefined without coordinated users");
  auto p = Partition::from_labels(universe, labels);
  const auto l = labeling_of(p, gt);
  EvalReport r;
  if (!flagged.empty()) {
    r.precision_star = static_cast<double>(tp) / static_cast<double>(flagged.size());
    r.recall_star = static_cast<double>(tp) / static_cast<double>(positives);
    r.f1_star = 2.0 * static_cast<double>(tp) / static_cast<double>(flagged.size() + positives);
  }
  r.best_cluster = 0;
  r.homogeneity = homogeneity_of(l);
  r.weighted_precision = wp_of(counts_of(l));
  r.nmi_binarized = nmi_of(l);
  r.cluster_count = p.community_count();
  r.singleton_count = p.singleton_count();
  return r;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractViolation("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

RandomLabelerStats random_labeler(std::size_t n_users, std::size_t n_positive, std::size_t n_clusters, std::size_t reps,
                                  std::uint64_t seed, unsigned threads) {
  if (n_clusters < 1 || reps < 1 || n_positive > n_users)
    throw ContractViolation("random_labeler requires n_clusters >= 1, reps >= 1 and n_positive <= n_users");
  std::vector<double> wp(reps), f1(reps), hom(reps);
  detail::parallel_for(reps, threads, [&](std::size_t rep) {
    Rng rng(derive_seed(seed, {rep}));
    Labeling l;
    l.n_clusters = n_clusters;
    l.n_classes = 2;
    for (std::size_t i = 0; i < n_users; ++i) {
      l.cluster.push_back(static_cast<std::uint32_t>(uniform_index(rng, n_clusters)));
      l.positive.push_back(i < n_positive ? 1 : 0);
      l.cls.push_back(i < n_positive ? 1 : 0);
    }
    const auto c = counts_of(l);
    wp[rep] = wp_of(c);
    f1[rep] = c.positives ? best_of(c).f1 : 0.0;
    hom[rep] = homogeneity_of(l);
  });
  auto summarize = [](const std::vector<double>& v) {
    Interval i;
    i.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    i.lo = percentile(v, 2.5);
    i.hi = percentile(v, 97.5);
    return i;
  };
  RandomLabelerStats s;
  s.reps = reps;
  s.n_clusters = n_clusters;
  s.weighted_precision = summarize(wp);
  s.f1_star = summarize(f1);
  s.homogeneity = summarize(hom);
  return s;
}

std::map<std::string, double> rank_methods(const ScoreTable& scores, bool higher_is_better) {
  std::set<std::string> datasets;
  for (const auto& [method, row] : scores)
    for (const auto& [dataset, score] : row) datasets.insert(dataset);
  for (const auto& [method, row] : scores)
    for (const auto& d : datasets)
      if (!row.count(d)) throw ValidationError("method '" + method + "' has no score for dataset '" + d + "'");

  std::map<std::string, double> sum;
  for (const auto& [method, row] : scores) sum[method] = 0.0;
  for (const auto& d : datasets) {
    std::vector<std::pair<double, std::string>> col;
    for (const auto& [method, row] : scores) col.emplace_back(row.at(d), method);
    std::sort(col.begin(), col.end(), [&](const auto& a, const auto& b) {
      return higher_is_better ? a.first > b.first : a.first < b.first;
    });
    for (std::size_t i = 0; i < col.size();) {
      std::size_t j = i;
      while (j < col.size() && col[j].first == col[i].first) ++j;
      const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
      for (std::size_t t = i; t < j; ++t) sum[col[t].second] += rank;
      i = j;
    }
  }
  if (!datasets.empty())
    for (auto& [method, s] : sum) s /= static_cast<double>(datasets.size());
  return sum;
}

namespace {
const std::vector<std::string> kEvalColumns{"method",        "dataset",     "f1_star",
                                            "precision_star", "recall_star", "homogeneity",
                                            "weighted_precision", "nmi_binarized", "cluster_count",
                                            "singleton_count"};
}

void write_eval_csv_header(std::ostream& out) { csv::write_row(out, kEvalColumns); }

void write_eval_csv_row(std::ostream& out, const std::string& method, const std::string& dataset, const EvalReport& r) {
  csv::write_row(out, {method, dataset, csv::format_double(r.f1_star), csv::format_double(r.precision_star),
                       csv::format_double(r.recall_star), csv::format_double(r.homogeneity),
                       csv::format_double(r.weighted_precision), csv::format_double(r.nmi_binarized),
                       std::to_string(r.cluster_count), std::to_string(r.singleton_count)});
}

void read_scores_csv(std::istream& in, const std::string& metric, ScoreTable& table) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return;
  auto col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header->begin(), header->end(), name);
    if (it == header->end()) throw ParseError(reader.record_line(), "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header->begin());
  };
  const auto im = col("method");
  const auto id = col("dataset");
  const auto is = col(metric);
  while (auto row = reader.next()) {
    if (row->size() != header->size()) throw ParseError(reader.record_line(), "wrong number of fields");
    double v = 0.0;
    try {
      v = std::stod((*row)[is]);
    } catch (const std::exception&) {
      throw ParseError(reader.record_line(), "score is not a number");
    }
    table[(*row)[im]][(*row)[id]] = v;
  }
}

void write_ranks_csv(std::ostream& out, const std::map<std::string, double>& ranks) {
  std::vector<std::pair<std::string, double>> rows(ranks.begin(), ranks.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  csv::write_row(out, {"method", "average_rank"});
  for (const auto& [m, r] : rows) csv::write_row(out, {m, csv::format_double(r)});
}

}  // namespace coordnet
