#include "ccwnet/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ccwnet/dgp.hpp"
#include "ccwnet/error.hpp"
#include "ccwnet/ingest.hpp"
#include "ccwnet/io.hpp"
#include "ccwnet/pipeline.hpp"
#include "ccwnet/proportion.hpp"
#include "ccwnet/replication.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/// Collects outputs of one run and writes the manifest next to them.
class RunContext {
 public:
  RunContext(std::string subcommand, const std::vector<std::string>& args)
      : subcommand_(std::move(subcommand)), args_(args), started_(std::chrono::steady_clock::now()) {}

  void note(const std::string& key, Json value) { inputs_[key] = std::move(value); }

  void write(const fs::path& path, const std::string& contents) {
    atomic_write(path, contents);
    outputs_.push_back(path.string());
  }

  void finish(const fs::path& manifest_path) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    Json m{{"tool", "ccwnet"},
           {"version", kVersion},
           {"subcommand", subcommand_},
           {"argv", args_},
           {"inputs", inputs_},
           {"outputs", outputs_},
           {"finished_utc", utc_now()},
           {"wall_seconds", wall}};
    atomic_write(manifest_path, dump(m));
  }

 private:
  std::string subcommand_;
  std::vector<std::string> args_;
  std::chrono::steady_clock::time_point started_;
  Json inputs_ = Json::object();
  Json outputs_ = Json::array();
};

fs::path manifest_for(const fs::path& primary) {
  fs::path m = primary;
  m += ".manifest.json";
  return m;
}

SplitSpec parse_split(const std::vector<double>& fractions, std::uint64_t seed, Index p) {
  if (fractions.empty()) {
    return p == 1 ? SplitSpec{0.8, 0.2, 0.0, seed} : SplitSpec{0.6, 0.2, 0.2, seed};
  }
  if (fractions.size() < 2 || fractions.size() > 3) throw ConfigError("--split takes two or three fractions");
  return SplitSpec{fractions[0], fractions[1], fractions.size() == 3 ? fractions[2] : 0.0, seed};
}

struct TrainOverrides {
  std::optional<double> learning_rate;
  std::optional<Index> max_epochs;
  std::optional<Index> batch_size;
  std::optional<Index> patience;
  std::optional<double> tol;

  void apply(TrainConfig& c) const {
    if (learning_rate) c.learning_rate = *learning_rate;
    if (max_epochs) c.max_epochs = *max_epochs;
    if (batch_size) c.batch_size = *batch_size;
    if (patience) c.early_stop_patience = *patience;
    if (tol) c.early_stop_tol = *tol;
    c.validate();
  }

  void add_to(CLI::App& app) {
    app.add_option("--learning-rate", learning_rate, "SGD step size (default 0.01)");
    app.add_option("--max-epochs", max_epochs, "Epoch budget (default 10000)");
    app.add_option("--batch-size", batch_size, "Minibatch size, 0 = full batch (default 64)");
    app.add_option("--patience", patience, "Early-stop patience in epochs (default 100)");
    app.add_option("--tol", tol, "Early-stop improvement threshold (default 1e-6)");
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Case-control logistic regression with external summaries and weighted MLPs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.footer(
      "Precedence: command-line flags override --config / scenario file values, which override "
      "built-in defaults. Exit codes: 0 ok, 1 domain error, 2 usage or config error.");

  std::function<void()> action;

  // oracle
  std::string g_name;
  std::uint64_t draws = kDefaultOracleDraws;
  std::uint64_t seed = 0;
  std::string out_path;
  auto* oracle = app.add_subcommand("oracle", "True marginal case proportion for a benchmark g");
  oracle->add_option("--g", g_name, "T1..T6")->required();
  oracle->add_option("--draws", draws, "Monte Carlo draws (p = 6) or panel scale (p = 1)")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  oracle->add_option("--seed", seed, "Monte Carlo seed");
  oracle->add_option("--out", out_path, "Also write the JSON here");

  // simulate
  Index n1 = 500;
  Index n0 = 500;
  Index n_e = 2000;
  Index h_index = 0;
  std::string summary_out;
  std::uint64_t oracle_draws = kDefaultOracleDraws;
  auto* simulate = app.add_subcommand("simulate", "Draw a case-control sample from a benchmark population");
  simulate->add_option("--g", g_name, "T1..T6")->required();
  simulate->add_option("--n1", n1, "Cases")->check(CLI::PositiveNumber);
  simulate->add_option("--n0", n0, "Controls")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Seed");
  simulate->add_option("--out", out_path, "Dataset CSV path; sidecar JSON goes next to it")->required();
  simulate->add_option("--summary-out", summary_out, "Also write an external summary JSON");
  simulate->add_option("--n-e", n_e, "External sample size")->check(CLI::Range(Index{2}, Index{1} << 40));
  simulate->add_option("--summary-coordinate", h_index, "Summary coordinate j (h(x) = x_j)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--oracle-draws", oracle_draws, "Draws for the sidecar true_p1");

  // estimate-prop
  std::string sample_path;
  std::string summary_path;
  double epsilon = kDefaultClampEpsilon;
  auto* estimate = app.add_subcommand("estimate-prop", "Estimate P1, the weights and the delta-method CI");
  estimate->add_option("--sample", sample_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
  estimate->add_option("--summary", summary_path, "External summary JSON")->required()->check(CLI::ExistingFile);
  estimate->add_option("--epsilon", epsilon, "Clamp for P1 in [eps, 1 - eps]");
  estimate->add_option("--out", out_path, "Also write the JSON here");

  // train
  std::string grid_path;
  std::string config_path;
  std::string out_dir;
  std::vector<double> split_fractions;
  TrainOverrides overrides;
  std::optional<std::uint64_t> train_seed;
  auto* trainc = app.add_subcommand("train", "Fit the weighted and unweighted network estimators");
  trainc->add_option("--sample", sample_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
  trainc->add_option("--summary", summary_path, "External summary JSON")->required()->check(CLI::ExistingFile);
  trainc->add_option("--grid", grid_path, "Grid JSON {depths, widths}")->check(CLI::ExistingFile);
  trainc->add_option("--config", config_path, "Train config JSON")->check(CLI::ExistingFile);
  trainc->add_option("--out", out_dir, "Output directory")->required();
  trainc->add_option("--split", split_fractions, "train,validation[,test] fractions")->delimiter(',');
  trainc->add_option("--seed", train_seed, "Master seed (overrides the config seed)");
  trainc->add_option("--g", g_name, "True g (T1..T6) for the p = 1 curve CSV");
  trainc->add_option("--epsilon", epsilon, "Clamp for P1");
  overrides.add_to(*trainc);

  // evaluate
  std::string fit_w_path;
  std::string fit_u_path;
  std::string test_path;
  auto* evaluate = app.add_subcommand("evaluate", "Relative errors and intercept shift of two fits");
  evaluate->add_option("--fit-weighted", fit_w_path, "FitResult JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--fit-unweighted", fit_u_path, "FitResult JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--truth", g_name, "True g (T1..T6)")->required();
  evaluate->add_option("--test", test_path, "Test dataset CSV (default: 200-point grid for p = 1)")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", out_path, "Also write the JSON here");

  // replicate
  std::string scenario_path;
  std::optional<Index> reps;
  unsigned workers = 1;
  bool fast_path = false;
  std::optional<std::uint64_t> master_seed;
  auto* replicate = app.add_subcommand("replicate", "Run a Monte Carlo experiment");
  replicate->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  replicate->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
  replicate->add_option("--workers", workers, "Worker threads")->envname("CCWNET_WORKERS")
      ->check(CLI::Range(1u, 1024u));
  replicate->add_flag("--fast-path", fast_path, "Proportion inference only, no network training");
  replicate->add_option("--seed", master_seed, "Master seed");
  replicate->add_option("--out", out_dir, "Output directory")->required();

  // ingest
  std::string schema_path;
  std::string input_path;
  std::string report_path;
  auto* ingest = app.add_subcommand("ingest", "Preprocess a census-style CSV into a dataset");
  ingest->add_option("--schema", schema_path, "Schema JSON")->required()->check(CLI::ExistingFile);
  ingest->add_option("--input", input_path, "Raw CSV with header")->required()->check(CLI::ExistingFile);
  ingest->add_option("--output", out_path, "Dataset CSV")->required();
  ingest->add_option("--report", report_path, "Report JSON")->required();

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  try {
    std::vector<std::string> reversed(argv_tail.rbegin(), argv_tail.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*oracle) {
      RunContext ctx("oracle", args);
      const GFunction g = GFunction::from_name(g_name);
      const auto result = true_p1(PopulationSpec{g}, draws, seed);
      Json j{{"g", g.name()},
             {"true_p1", result.p1},
             {"se", result.se},
             {"method", g.arity() == 1 ? "gauss_legendre" : "monte_carlo"},
             {"draws", draws},
             {"seed", seed}};
      out << j.dump() << '\n';
      if (!out_path.empty()) {
        ctx.write(out_path, dump(j));
        ctx.note("g", g.name());
        ctx.note("seed", seed);
        ctx.finish(manifest_for(out_path));
      }
    } else if (*simulate) {
      RunContext ctx("simulate", args);
      const GFunction g = GFunction::from_name(g_name);
      const PopulationSpec spec{g};
      const auto sample = sample_case_control(spec, n1, n0, derive_seed(seed, {tag(Stream::kSample)}));
      const auto oracle_value = true_p1(spec, oracle_draws, seed);
      const fs::path data_path = out_path;
      ctx.write(data_path, dataset_to_csv(sample.data()));
      Json sidecar{{"tag", g.name()}, {"p", g.arity()},     {"n1", n1},
                   {"n0", n0},        {"seed", seed},       {"true_p1", oracle_value.p1}};
      fs::path sidecar_path = data_path;
      sidecar_path.replace_extension(".json");
      ctx.write(sidecar_path, dump(sidecar));
      if (!summary_out.empty()) {
        const auto summary = make_external_summary(spec, SummarySpec::coordinate(h_index), n_e,
                                                   derive_seed(seed, {tag(Stream::kSummary)}));
        ctx.write(summary_out, dump(to_json(summary)));
      }
      ctx.note("sidecar", sidecar);
      ctx.note("n_e", n_e);
      ctx.finish(manifest_for(data_path));
    } else if (*estimate) {
      RunContext ctx("estimate-prop", args);
      const CaseControlSample sample(read_dataset_csv(sample_path));
      const auto summary = external_summary_from_json(read_json(summary_path));
      const auto est = delta_variance(sample, summary, epsilon);
      const Json j = to_json(est);
      out << dump(j);
      if (!out_path.empty()) {
        ctx.write(out_path, dump(j));
        ctx.note("sample", sample_path);
        ctx.note("summary", to_json(summary));
        ctx.note("epsilon", epsilon);
        ctx.finish(manifest_for(out_path));
      }
    } else if (*trainc) {
      RunContext ctx("train", args);
      const CaseControlSample sample(read_dataset_csv(sample_path));
      const auto summary = external_summary_from_json(read_json(summary_path));
      TrainConfig config = config_path.empty() ? TrainConfig{} : train_config_from_json(read_json(config_path));
      overrides.apply(config);
      if (train_seed) config.seed = *train_seed;
      const GridSpec grid = grid_path.empty() ? GridSpec{} : grid_spec_from_json(read_json(grid_path));
      const auto split = parse_split(split_fractions, config.seed, sample.dim());
      const auto parts = split_dataset(sample, split);
      if (!parts.validation) throw ConfigError("training needs a nonzero validation fraction");

      const auto est = delta_variance(sample, summary, epsilon);
      const auto weighted = fit(parts.train, *parts.validation, est.w1_hat, est.w0_hat, grid, config);
      const auto unweighted = fit(parts.train, *parts.validation, 1.0, 1.0, grid, config);
      const fs::path dir = out_dir;
      ctx.write(dir / "proportion.json", dump(to_json(est)));
      ctx.write(dir / "fit_weighted.json", dump(to_json(weighted)));
      ctx.write(dir / "fit_unweighted.json", dump(to_json(unweighted)));
      if (parts.test) ctx.write(dir / "test.csv", dataset_to_csv(parts.test->data()));
      if (sample.dim() == 1 && !g_name.empty()) {
        const GFunction g = GFunction::from_name(g_name);
        const Eigen::MatrixXd grid_x = univariate_grid(200);
        const Eigen::VectorXd truth = g.evaluate(grid_x);
        const Eigen::VectorXd hat = weighted.network.forward_rows(grid_x);
        std::ostringstream csv;
        csv.precision(17);
        csv << "x,g_true,g_hat\n";
        for (Index k = 0; k < grid_x.rows(); ++k) csv << grid_x(k, 0) << ',' << truth(k) << ',' << hat(k) << '\n';
        ctx.write(dir / "curve.csv", csv.str());
      }
      ctx.note("sample", sample_path);
      ctx.note("summary", to_json(summary));
      ctx.note("train_config", to_json(config));
      ctx.note("grid", to_json(grid));
      ctx.note("split", {split.train, split.validation, split.test});
      ctx.finish(dir / "manifest.json");
      out << dump(Json{{"weighted", {{"depth", weighted.depth}, {"width", weighted.width},
                                     {"validation_accuracy", weighted.validation_accuracy}}},
                       {"unweighted", {{"depth", unweighted.depth}, {"width", unweighted.width},
                                       {"validation_accuracy", unweighted.validation_accuracy}}}});
    } else if (*evaluate) {
      RunContext ctx("evaluate", args);
      const auto fw = fit_result_from_json(read_json(fit_w_path));
      const auto fu = fit_result_from_json(read_json(fit_u_path));
      const GFunction g = GFunction::from_name(g_name);
      Eigen::MatrixXd test_x;
      if (!test_path.empty()) {
        test_x = read_dataset_csv(test_path).x();
      } else if (g.arity() == 1) {
        test_x = univariate_grid(200);
      } else {
        throw ConfigError("--test is required for multivariate truths");
      }
      if (test_x.cols() != g.arity() || fw.network.architecture().input_dim != g.arity() ||
          fu.network.architecture().input_dim != g.arity()) {
        throw ConfigError("fit, truth and test dimensions disagree");
      }
      const Json j{{"re_weighted", relative_error(as_function(fw.network), g, test_x)},
                   {"re_unweighted", relative_error(as_function(fu.network), g, test_x)},
                   {"gamma_shift", gamma_shift(as_function(fw.network), as_function(fu.network), test_x)}};
      out << dump(j);
      if (!out_path.empty()) {
        ctx.write(out_path, dump(j));
        ctx.note("truth", g.name());
        ctx.finish(manifest_for(out_path));
      }
    } else if (*replicate) {
      RunContext ctx("replicate", args);
      Scenario scenario = scenario_from_json(read_json(scenario_path));
      if (reps) scenario.replications = *reps;
      if (fast_path) scenario.fast_path = true;
      if (master_seed) scenario.master_seed = *master_seed;
      scenario.validate();
      const auto summary = run_experiment(scenario, workers);
      const fs::path dir = out_dir;
      ctx.write(dir / "summary.json", dump(to_json(summary)));
      ctx.write(dir / "table.csv", emit_table({summary}, scenario.fast_path ? TableStyle::kProportions : TableStyle::kErrors));
      ctx.write(dir / "replicates.csv", replicates_to_csv(summary.replicates));
      ctx.note("scenario", to_json(scenario));
      ctx.note("workers", workers);
      ctx.finish(dir / "manifest.json");
      if (summary.failed > 0) {
        err << summary.failed << " of " << summary.replications << " replicates failed\n";
      }
      out << dump(Json{{"succeeded", summary.succeeded}, {"failed", summary.failed},
                       {"coverage", summary.coverage}, {"mean_p1_hat", summary.p1_hat.mean}});
    } else if (*ingest) {
      RunContext ctx("ingest", args);
      const Schema schema = schema_from_json(read_json(schema_path));
      const auto table = load_csv(input_path, schema);
      const auto result = preprocess(table, schema);
      ctx.write(out_path, dataset_to_csv(result.dataset));
      ctx.write(report_path, dump(to_json(result.report)));
      ctx.note("schema", schema_path);
      ctx.note("input", input_path);
      ctx.finish(manifest_for(out_path));
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace ccwnet
