#include "ccwnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

#include "ccwnet/error.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet {

void GridSpec::validate() const {
  if (depths.empty() || widths.empty()) throw ConfigError("grid needs at least one depth and width");
  for (Index d : depths) if (d < 1) throw ConfigError("grid depths must be positive");
  for (Index w : widths) if (w < 1) throw ConfigError("grid widths must be positive");
}

double validation_accuracy(const Network& net, const Dataset& data) {
  if (data.empty()) throw DomainError("validation set is empty");
  const Eigen::VectorXd g = net.forward_rows(data.x());
  const Eigen::ArrayXd predicted = (g.array() >= 0.0).cast<double>();
  return static_cast<double>((predicted == data.y().array()).count()) /
         static_cast<double>(data.size());
}

FitResult fit(const CaseControlSample& train_set, const CaseControlSample& val, double w1,
              double w0, const GridSpec& grid, const TrainConfig& config) {
  grid.validate();
  config.validate();

  FitResult best;
  std::optional<std::tuple<double, Index, Index>> best_key;
  for (Index depth : grid.depths) {
    for (Index width : grid.widths) {
      const Architecture arch{train_set.dim(), depth, width};
      GridCellOutcome cell{depth, width, 0.0, 0, false, {}};
      TrainConfig cell_config = config;
      cell_config.seed = derive_seed(config.seed, {tag(Stream::kGridCell),
                                                   static_cast<std::uint64_t>(depth),
                                                   static_cast<std::uint64_t>(width)});
      try {
        auto trained = train(init_network(arch, cell_config.seed), train_set, w1, w0, cell_config, val);
        cell.validation_accuracy = validation_accuracy(trained.network, val);
        cell.epochs_run = static_cast<Index>(trained.history.size());
        // Order: higher accuracy, then fewer parameters, then shallower.
        const auto key = std::make_tuple(cell.validation_accuracy, -arch.size(), -depth);
        if (!best_key || key > *best_key) {
          best_key = key;
          best.network = std::move(trained.network);
          best.depth = depth;
          best.width = width;
          best.validation_accuracy = cell.validation_accuracy;
          best.history = std::move(trained.history);
        }
      } catch (const DomainError& e) {
        cell.diverged = true;
        cell.error = e.what();
      }
      best.cells.push_back(std::move(cell));
    }
  }
  if (!best_key) throw DomainError("every grid cell diverged");
  best.w1 = w1;
  best.w0 = w0;
  best.weighted = !(w1 == 1.0 && w0 == 1.0);
  return best;
}

double relative_error(const Eigen::VectorXd& fit_values, const Eigen::VectorXd& truth_values) {
  if (fit_values.size() != truth_values.size() || truth_values.size() == 0) {
    throw ConfigError("relative error needs equal-length, nonempty value vectors");
  }
  const double denom = truth_values.cwiseAbs().sum();
  if (!(denom > 0.0)) throw DomainError("degenerate truth: sum |g| over the test set is zero");
  return (fit_values - truth_values).cwiseAbs().sum() / denom;
}

double relative_error(const BatchFunction& fit_g, const GFunction& truth,
                      const Eigen::MatrixXd& test_x) {
  if (test_x.rows() == 0) throw DomainError("test set is empty");
  return relative_error(fit_g(test_x), truth.evaluate(test_x));
}

double gamma_shift(const BatchFunction& fit_weighted, const BatchFunction& fit_unweighted,
                   const Eigen::MatrixXd& test_x) {
  if (test_x.rows() == 0) throw DomainError("test set is empty");
  const Eigen::VectorXd diff = fit_unweighted(test_x) - fit_weighted(test_x);
  std::vector<double> v(diff.data(), diff.data() + diff.size());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

double theoretical_gamma_shift(Index n1, Index n0, double p1) {
  return std::log(static_cast<double>(n1) * (1.0 - p1) / (static_cast<double>(n0) * p1));
}

}  // namespace ccwnet
