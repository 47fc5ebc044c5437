#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccwnet/data.hpp"
#include "ccwnet/dgp.hpp"
#include "ccwnet/pipeline.hpp"
#include "ccwnet/train.hpp"

namespace ccwnet {

/// One simulation design: population, sampling sizes, summary, split, grid
/// and training settings, and the number of Monte Carlo replicates.
struct Scenario {
  std::string name;
  GFunction::Tag g = GFunction::Tag::T1;
  Index n1 = 500;
  Index n0 = 500;
  Index n_e = 2000;
  SummarySpec h = SummarySpec::coordinate(0);
  /// train / validation / test fractions; with a zero test fraction the
  /// univariate curve grid is the evaluation set.
  double train_fraction = 0.8;
  double validation_fraction = 0.2;
  double test_fraction = 0.0;
  GridSpec grid;
  TrainConfig train_config;
  Index replications = 20;
  std::uint64_t master_seed = 20240101;
  bool fast_path = false;
  double epsilon = kDefaultClampEpsilon;
  Index eval_grid_points = 200;
  std::uint64_t oracle_draws = kDefaultOracleDraws;

  /// Standard protocol for g: 80/20 split for p = 1, 60/20/20 otherwise.
  static Scenario for_function(GFunction::Tag g, Index n1, Index n0);

  GFunction function() const { return GFunction::standard(g); }
  void validate() const;
};

struct ReplicationResult {
  Index index = 0;
  bool ok = false;
  std::string error;
  double p1_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool covered = false;
  bool clamped = false;
  double w1 = 1.0;
  double w0 = 1.0;
  /// Network metrics; NaN on the fast path.
  double re_weighted = 0.0;
  double re_unweighted = 0.0;
  double gamma_shift = 0.0;
  Index depth_weighted = 0;
  Index width_weighted = 0;
  Index depth_unweighted = 0;
  Index width_unweighted = 0;
  double runtime_seconds = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
};

struct ReplicationSummary {
  Scenario scenario;
  double true_p1 = 0.0;
  double true_p1_se = 0.0;
  Index replications = 0;
  Index succeeded = 0;
  Index failed = 0;
  double coverage = 0.0;
  MetricSummary p1_hat;
  MetricSummary se;
  MetricSummary re_weighted;
  MetricSummary re_unweighted;
  MetricSummary gamma_shift;
  std::vector<ReplicationResult> replicates;
};

/// Replicate `index` of the scenario. Stage failures are recorded in the
/// result rather than thrown.
ReplicationResult run_replication(const Scenario& scenario, Index index, double true_p1);

/// Runs every replicate on up to `workers` threads and aggregates in index
/// order. Throws DomainError when every replicate fails.
ReplicationSummary run_experiment(const Scenario& scenario, unsigned workers = 1);

/// Aggregates already computed replicates (any order).
ReplicationSummary summarize(const Scenario& scenario, double true_p1, double true_p1_se,
                             std::vector<ReplicationResult> replicates);

enum class TableStyle { kErrors, kErrorsReadable, kProportions };

/// CSV text with a header row; four decimals. Throws on empty input.
std::string emit_table(const std::vector<ReplicationSummary>& summaries, TableStyle style);

}  // namespace ccwnet
