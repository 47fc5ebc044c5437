#include "ccwnet/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ccwnet/error.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (max_epochs < 0) throw ConfigError("max_epochs must be nonnegative");
  if (batch_size < 0) throw ConfigError("batch_size must be nonnegative");
  if (!(early_stop_tol >= 0.0)) throw ConfigError("early_stop_tol must be nonnegative");
  if (early_stop_patience < 1) throw ConfigError("early_stop_patience must be positive");
  if (output_clamp && !(*output_clamp > 0.0)) throw ConfigError("output_clamp must be positive");
}

namespace {

double full_loss(const Network& net, const Eigen::MatrixXd& xt, const Eigen::VectorXd& y,
                 LossWeights lw) {
  return weighted_loss_from_outputs<double>(net.forward_columns(xt), y.transpose(), lw);
}

}  // namespace

TrainResult train(Network net, const CaseControlSample& train_set, double w1, double w0,
                  const TrainConfig& config, const std::optional<CaseControlSample>& monitor) {
  config.validate();
  if (train_set.dim() != net.architecture().input_dim) {
    throw ConfigError("training data dimension does not match the network input");
  }
  if (monitor && monitor->dim() != train_set.dim()) {
    throw ConfigError("monitor data dimension does not match the training data");
  }
  net.set_output_clamp(config.output_clamp);
  const auto lw = LossWeights::from_weights(w1, w0);

  TrainResult result{net, {}, 0};
  if (config.max_epochs == 0) return result;

  const Eigen::MatrixXd xt = train_set.data().x().transpose();
  const Eigen::VectorXd& y = train_set.data().y();
  const Index n = xt.cols();
  const Index batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);

  Eigen::MatrixXd monitor_xt;
  if (monitor) monitor_xt = monitor->data().x().transpose();

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(derive_seed(config.seed, {tag(Stream::kShuffle)}));

  Backprop<double> bp;
  Gradients grads = net.zero_gradients();
  Eigen::MatrixXd bx(xt.rows(), batch);
  Eigen::VectorXd by(batch);

  double best = std::numeric_limits<double>::infinity();
  double reference = best;
  Index stale = 0;
  result.history.reserve(static_cast<std::size_t>(std::min<Index>(config.max_epochs, 100000)));

  for (Index epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (batch < n) shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    Index batches = 0;
    for (Index start = 0; start < n; start += batch) {
      const Index m = std::min(batch, n - start);
      for (Index k = 0; k < m; ++k) {
        const Index idx = order[static_cast<std::size_t>(start + k)];
        bx.col(k) = xt.col(idx);
        by(k) = y(idx);
      }
      const double loss = m == batch ? bp.run(net, bx, by, lw, grads)
                                     : bp.run(net, bx.leftCols(m), by.head(m), lw, grads);
      if (!std::isfinite(loss)) {
        throw DomainError("divergence: non-finite loss at epoch " + std::to_string(epoch));
      }
      net.descend(grads, config.learning_rate);
      loss_sum += loss;
      ++batches;
    }
    const double train_loss = loss_sum / static_cast<double>(batches);
    const double monitored = monitor ? full_loss(net, monitor_xt, monitor->data().y(), lw)
                                     : full_loss(net, xt, y, lw);
    if (!std::isfinite(monitored)) {
      throw DomainError("divergence: non-finite loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back({epoch, train_loss, monitored});

    if (monitored < best) {
      best = monitored;
      result.network = net;
      result.best_epoch = epoch;
    }
    if (monitored < reference - config.early_stop_tol) {
      reference = monitored;
      stale = 0;
    } else if (++stale >= config.early_stop_patience) {
      break;
    }
  }
  return result;
}

}  // namespace ccwnet
