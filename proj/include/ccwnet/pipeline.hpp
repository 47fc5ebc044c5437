#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ccwnet/data.hpp"
#include "ccwnet/dgp.hpp"
#include "ccwnet/network.hpp"
#include "ccwnet/train.hpp"

namespace ccwnet {

struct GridSpec {
  std::vector<Index> depths{2, 3, 4};
  std::vector<Index> widths{64, 128};

  void validate() const;
};

struct GridCellOutcome {
  Index depth = 0;
  Index width = 0;
  double validation_accuracy = 0.0;
  Index epochs_run = 0;
  bool diverged = false;
  std::string error;
};

struct FitResult {
  Network network;
  Index depth = 0;
  Index width = 0;
  double validation_accuracy = 0.0;
  bool weighted = false;
  double w1 = 1.0;
  double w0 = 1.0;
  std::vector<EpochRecord> history;
  std::vector<GridCellOutcome> cells;
};

/// Maps an n-by-p matrix of points to n function values.
using BatchFunction = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

inline BatchFunction as_function(const Network& net) {
  return [&net](const Eigen::MatrixXd& x) { return net.forward_rows(x); };
}
inline BatchFunction as_function(const GFunction& g) {
  return [&g](const Eigen::MatrixXd& x) { return g.evaluate(x); };
}

/// Share of rows where [g(x) >= 0] (equivalently sigmoid >= 1/2) equals the label.
double validation_accuracy(const Network& net, const Dataset& val);
inline double validation_accuracy(const Network& net, const CaseControlSample& val) {
  return validation_accuracy(net, val.data());
}

/// Trains one network per grid cell and keeps the best by validation
/// accuracy, ties broken by fewer parameters and then smaller depth.
/// Weights (1, 1) give the unweighted estimator.
FitResult fit(const CaseControlSample& train_set, const CaseControlSample& val, double w1,
              double w0, const GridSpec& grid, const TrainConfig& config);

/// sum |fit - truth| / sum |truth|. Throws DomainError("degenerate truth").
double relative_error(const Eigen::VectorXd& fit_values, const Eigen::VectorXd& truth_values);
double relative_error(const BatchFunction& fit_g, const GFunction& truth,
                      const Eigen::MatrixXd& test_x);

/// Median over test points of unweighted minus weighted fit.
double gamma_shift(const BatchFunction& fit_weighted, const BatchFunction& fit_unweighted,
                   const Eigen::MatrixXd& test_x);

/// log(n1 (1 - P1) / (n0 P1)): the intercept offset of a naive case-control fit.
double theoretical_gamma_shift(Index n1, Index n0, double p1);

}  // namespace ccwnet
