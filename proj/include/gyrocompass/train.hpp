// Mini-batch training loop for the heading regressor: shuffled batches,
// Adam or plain SGD on the cyclic MSE, global-norm gradient clipping, and
// best-validation-epoch parameter retention.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gyrocompass/dataset.hpp"
#include "gyrocompass/lstm.hpp"

namespace gyro {

enum class Optimizer { adam, sgd };

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 100;
  double learning_rate = 0.0015;
  Optimizer optimizer = Optimizer::adam;
  std::uint64_t seed = 0;  // drives batch shuffling only
  std::optional<int> patience;  // stop after this many epochs without validation improvement

  bool valid() const {
    return epochs > 0 && batch_size > 0 && learning_rate > 0.0 &&
           (!patience.has_value() || *patience > 0);
  }
};

struct TrainReport {
  std::vector<double> train_crmse_deg;  // one entry per epoch actually run
  std::vector<double> val_crmse_deg;
  int best_epoch = -1;  // 1-based epoch whose parameters the model keeps
  double best_val_crmse_deg = 0.0;
  double wall_time_s = 0.0;  // kept in memory only; serialized reports omit it
};

// Trains in place and leaves the model at its best-validation parameters.
// Throws on invalid config, empty splits, or a non-finite training loss.
TrainReport train(BiLstmModel& model, const DatasetSplit& split, const TrainConfig& cfg);

// Circular RMSE of the model over a sample set, degrees.
double dataset_crmse_deg(const BiLstmModel& model, const std::vector<Sample>& samples);

}  // namespace gyro
