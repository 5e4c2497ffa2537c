#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "coordnet/community.hpp"
#include "coordnet/ingest.hpp"

namespace coordnet {

struct ClusterScores {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::uint32_t cluster = 0;
  std::size_t cluster_size = 0;
};

/// Cluster with the highest F1 against the coordinated users; ties go to
/// the larger cluster, then the smaller id. Recall is relative to the
/// positives among the partition's nodes. UndefinedResult if there are none.
ClusterScores best_cluster_scores(const Partition& p, const GroundTruth& gt);

/// sum_k n_k p_k^2 / sum_k n_k p_k where p_k is the positive rate of cluster
/// k, or 0 for singletons. 0 when the denominator vanishes.
double weighted_precision(const Partition& p, const GroundTruth& gt);

/// 1 - H(class | cluster) / H(class) over GroundTruth::class_of; 1 when
/// H(class) = 0.
double homogeneity(const Partition& p, const GroundTruth& gt);

/// NMI (arithmetic-mean normalization, natural log) between the binary
/// ground truth and the labeling that marks a cluster positive iff strictly
/// more than half of it is positive. 0 if either side has zero entropy.
double nmi_binarized(const Partition& p, const GroundTruth& gt);

struct EvalReport {
  double f1_star = 0.0;
  double precision_star = 0.0;
  double recall_star = 0.0;
  std::uint32_t best_cluster = 0;
  double homogeneity = 0.0;
  double weighted_precision = 0.0;
  double nmi_binarized = 0.0;
  std::size_t cluster_count = 0;
  std::size_t singleton_count = 0;
};

EvalReport evaluate(const Partition& p, const GroundTruth& gt);

/// Scores a flagged user set: precision/recall/F1 of the set itself, the
/// other scores on the two-cluster partition {flagged, rest} of `universe`.
/// best_cluster is 0 for the flagged side.
EvalReport evaluate_flagged(const std::set<std::string>& flagged, const std::vector<std::string>& universe,
                            const GroundTruth& gt);

struct Interval {
  double mean = 0.0;
  double lo = 0.0;  // 2.5th percentile
  double hi = 0.0;  // 97.5th percentile
};

struct RandomLabelerStats {
  std::size_t reps = 0;
  std::size_t n_clusters = 0;
  Interval weighted_precision;
  Interval f1_star;
  Interval homogeneity;
};

/// Each rep assigns every user an independent uniform label in
/// [0, n_clusters); rep r draws from derive_seed(seed, {r}).
RandomLabelerStats random_labeler(std::size_t n_users, std::size_t n_positive, std::size_t n_clusters, std::size_t reps,
                                  std::uint64_t seed, unsigned threads = 1);

/// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

using ScoreTable = std::map<std::string, std::map<std::string, double>>;  // method -> dataset -> score

/// Mean rank per method over datasets; rank 1 is best, ties share the mean
/// of their positions. ValidationError naming the method and dataset if a
/// method lacks a score for a dataset some other method has.
std::map<std::string, double> rank_methods(const ScoreTable& scores, bool higher_is_better = true);

/// CSV `method,dataset,f1_star,precision_star,recall_star,homogeneity,
/// weighted_precision,nmi_binarized,cluster_count,singleton_count`.
void write_eval_csv_header(std::ostream& out);
void write_eval_csv_row(std::ostream& out, const std::string& method, const std::string& dataset, const EvalReport& r);

/// Reads rows of the CSV above (header required) and adds `metric` to `table`.
void read_scores_csv(std::istream& in, const std::string& metric, ScoreTable& table);

void write_ranks_csv(std::ostream& out, const std::map<std::string, double>& ranks);

}  // namespace coordnet
