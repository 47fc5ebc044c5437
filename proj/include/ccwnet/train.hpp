#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ccwnet/data.hpp"
#include "ccwnet/network.hpp"

namespace ccwnet {

struct TrainConfig {
  double learning_rate = 0.01;
  Index max_epochs = 10000;
  /// 0 means full batch.
  Index batch_size = 64;
  double early_stop_tol = 1e-6;
  Index early_stop_patience = 100;
  std::uint64_t seed = 0;
  std::optional<double> output_clamp;

  void validate() const;
};

struct EpochRecord {
  Index epoch = 0;
  /// Mean minibatch loss over the epoch.
  double train_loss = 0.0;
  /// Validation loss after the epoch, or the full training loss when no
  /// validation set is monitored.
  double monitor_loss = 0.0;
};

struct TrainResult {
  Network network;
  std::vector<EpochRecord> history;
  Index best_epoch = 0;
};

/// Minibatch SGD on the weighted objective. Keeps the parameters with the
/// lowest monitored loss; stops after `early_stop_patience` epochs without an
/// improvement of at least `early_stop_tol`. Throws DomainError on a
/// non-finite loss.
TrainResult train(Network net, const CaseControlSample& train_set, double w1, double w0,
                  const TrainConfig& config,
                  const std::optional<CaseControlSample>& monitor = std::nullopt);

}  // namespace ccwnet
