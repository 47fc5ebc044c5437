#include "ccwnet/replication.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "ccwnet/error.hpp"
#include "ccwnet/proportion.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet {

Scenario Scenario::for_function(GFunction::Tag g, Index n1, Index n0) {
  Scenario s;
  s.g = g;
  s.n1 = n1;
  s.n0 = n0;
  const GFunction fn = GFunction::standard(g);
  s.name = fn.name() + "_" + std::to_string(n1) + "_" + std::to_string(n0);
  if (fn.arity() > 1) {
    s.train_fraction = 0.6;
    s.validation_fraction = 0.2;
    s.test_fraction = 0.2;
  }
  return s;
}

void Scenario::validate() const {
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (n1 < 2 || n0 < 2) throw ConfigError("n1 and n0 must be at least 2");
  if (n_e < 2) throw ConfigError("n_e must be at least 2");
  const GFunction fn = function();
  h.validate(fn.arity());
  SplitSpec{train_fraction, validation_fraction, test_fraction, 0}.validate();
  if (!fast_path) {
    if (!(validation_fraction > 0.0)) throw ConfigError("network fits need a validation fraction");
    if (test_fraction == 0.0 && fn.arity() != 1) {
      throw ConfigError("multivariate scenarios need a test fraction");
    }
    if (eval_grid_points < 1) throw ConfigError("eval_grid_points must be positive");
    grid.validate();
    train_config.validate();
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in (0, 0.5)");
}

ReplicationResult run_replication(const Scenario& scenario, Index index, double true_p1) {
  const auto started = std::chrono::steady_clock::now();
  ReplicationResult r;
  r.index = index;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.re_weighted = r.re_unweighted = r.gamma_shift = nan;
  const std::uint64_t seed = derive_seed(scenario.master_seed, {static_cast<std::uint64_t>(index)});
  try {
    const PopulationSpec population{scenario.function()};
    const auto sample = sample_case_control(population, scenario.n1, scenario.n0,
                                            derive_seed(seed, {tag(Stream::kSample)}));
    const auto summary = make_external_summary(population, scenario.h, scenario.n_e,
                                               derive_seed(seed, {tag(Stream::kSummary)}));
    const auto est = delta_variance(sample, summary, scenario.epsilon);
    r.p1_hat = est.p1_hat;
    r.se = est.se;
    r.ci_lo = est.ci_lo;
    r.ci_hi = est.ci_hi;
    r.covered = est.ci_lo <= true_p1 && true_p1 <= est.ci_hi;
    r.clamped = est.clamped;
    r.w1 = est.w1_hat;
    r.w0 = est.w0_hat;

    if (!scenario.fast_path) {
      const SplitSpec split{scenario.train_fraction, scenario.validation_fraction,
                            scenario.test_fraction, derive_seed(seed, {tag(Stream::kSplit)})};
      const auto parts = split_dataset(sample, split);
      TrainConfig config = scenario.train_config;
      config.seed = derive_seed(seed, {tag(Stream::kGridCell)});
      const auto weighted = fit(parts.train, *parts.validation, est.w1_hat, est.w0_hat,
                                scenario.grid, config);
      const auto unweighted = fit(parts.train, *parts.validation, 1.0, 1.0, scenario.grid, config);
      const Eigen::MatrixXd test_x = parts.test ? parts.test->data().x()
                                                : univariate_grid(scenario.eval_grid_points);
      const GFunction truth = population.g;
      r.re_weighted = relative_error(as_function(weighted.network), truth, test_x);
      r.re_unweighted = relative_error(as_function(unweighted.network), truth, test_x);
      r.gamma_shift = ccwnet::gamma_shift(as_function(weighted.network),
                                          as_function(unweighted.network), test_x);
      r.depth_weighted = weighted.depth;
      r.width_weighted = weighted.width;
      r.depth_unweighted = unweighted.depth;
      r.width_unweighted = unweighted.width;
    }
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

namespace {

MetricSummary describe(std::vector<double> values) {
  MetricSummary m;
  if (values.empty()) {
    m.mean = m.sd = m.median = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / (n - 1.0));
  }
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size() / 2;
  m.median = values.size() % 2 ? values[k] : 0.5 * (values[k - 1] + values[k]);
  return m;
}

}  // namespace

ReplicationSummary summarize(const Scenario& scenario, double true_p1, double true_p1_se,
                             std::vector<ReplicationResult> replicates) {
  std::sort(replicates.begin(), replicates.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });
  ReplicationSummary s;
  s.scenario = scenario;
  s.true_p1 = true_p1;
  s.true_p1_se = true_p1_se;
  s.replications = static_cast<Index>(replicates.size());
  std::vector<double> p1, se, rew, reu, shift;
  Index covered = 0;
  for (const auto& r : replicates) {
    if (!r.ok) {
      ++s.failed;
      continue;
    }
    ++s.succeeded;
    covered += r.covered ? 1 : 0;
    p1.push_back(r.p1_hat);
    se.push_back(r.se);
    if (!scenario.fast_path) {
      rew.push_back(r.re_weighted);
      reu.push_back(r.re_unweighted);
      shift.push_back(r.gamma_shift);
    }
  }
  s.coverage = s.succeeded ? static_cast<double>(covered) / static_cast<double>(s.succeeded) : 0.0;
  s.p1_hat = describe(std::move(p1));
  s.se = describe(std::move(se));
  s.re_weighted = describe(std::move(rew));
  s.re_unweighted = describe(std::move(reu));
  s.gamma_shift = describe(std::move(shift));
  s.replicates = std::move(replicates);
  return s;
}

ReplicationSummary run_experiment(const Scenario& scenario, unsigned workers) {
  scenario.validate();
  const PopulationSpec population{scenario.function()};
  const auto oracle = true_p1(population, scenario.oracle_draws, scenario.master_seed);

  const auto reps = static_cast<std::size_t>(scenario.replications);
  std::vector<ReplicationResult> results(reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < reps; i = next++) {
      results[i] = run_replication(scenario, static_cast<Index>(i), oracle.p1);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(reps)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  auto summary = summarize(scenario, oracle.p1, oracle.se, std::move(results));
  if (summary.succeeded == 0) {
    throw DomainError("every replicate failed; first error: " + summary.replicates.front().error);
  }
  return summary;
}

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string emit_table(const std::vector<ReplicationSummary>& summaries, TableStyle style) {
  if (summaries.empty()) throw ConfigError("no summaries to tabulate");
  std::ostringstream out;
  switch (style) {
    case TableStyle::kProportions:
      out << "type,form_label,true_p1\n";
      for (const auto& s : summaries) {
        const GFunction g = s.scenario.function();
        out << g.name() << ',' << g.form() << ',' << fixed4(s.true_p1) << '\n';
      }
      break;
    case TableStyle::kErrors:
      out << "type,n0,n1,mean_re_weighted,sd_re_weighted,mean_re_unweighted,sd_re_unweighted\n";
      for (const auto& s : summaries) {
        out << s.scenario.function().name() << ',' << s.scenario.n0 << ',' << s.scenario.n1 << ','
            << fixed4(s.re_weighted.mean) << ',' << fixed4(s.re_weighted.sd) << ','
            << fixed4(s.re_unweighted.mean) << ',' << fixed4(s.re_unweighted.sd) << '\n';
      }
      break;
    case TableStyle::kErrorsReadable:
      out << "type,n0,n1,re_weighted,re_unweighted\n";
      for (const auto& s : summaries) {
        out << s.scenario.function().name() << ',' << s.scenario.n0 << ',' << s.scenario.n1 << ','
            << fixed4(s.re_weighted.mean) << " (" << fixed4(s.re_weighted.sd) << "),"
            << fixed4(s.re_unweighted.mean) << " (" << fixed4(s.re_unweighted.sd) << ")\n";
      }
      break;
  }
  return out.str();
}

}  // namespace ccwnet
