// Bidirectional LSTM heading regressor with hand-written backpropagation
// through time, plus the cyclic mean-square-error loss used to train it.
// Parameters live in one flat vector so the optimizer and the checkpoint
// reader can treat the model as a plain array of doubles.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gyrocompass/frames.hpp"

namespace gyro {

struct BiLstmConfig {
  int num_layers = 2;
  int hidden_size = 16;
  int input_size = 3;  // triaxial gyro rates
  // Inputs arrive in deg/hr; dividing by the Earth-rate magnitude keeps the
  // stationary signal near unit scale regardless of latitude.
  double input_scale = 0.0;  // 0 selects the Earth-rate default

  bool valid() const;
};

// Everything the backward pass needs from a forward pass: per layer and
// direction the gate activations, cell states, and hidden states at every
// step, indexed by actual time (the backward direction just walks t in
// reverse). Reused across samples to avoid reallocation.
struct LstmCache {
  std::size_t steps = 0;
  std::vector<std::vector<double>> layer_in;  // [layer] -> steps * in_dim, input scaling applied
  // [layer * 2 + dir] -> steps * hidden, dir 0 forward, dir 1 backward
  std::vector<std::vector<double>> gate_i, gate_f, gate_g, gate_o;
  std::vector<std::vector<double>> cell, cell_tanh, hidden;
};

class BiLstmModel {
 public:
  explicit BiLstmModel(const BiLstmConfig& cfg);  // all parameters zero

  // Uniform init in (-1/sqrt(H), 1/sqrt(H)) from a fixed draw order, then +1
  // on the forget-gate biases so early training does not forget everything.
  static BiLstmModel random_init(const BiLstmConfig& cfg, std::uint64_t seed);

  const BiLstmConfig& config() const { return cfg_; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Heading estimate in degrees, unwrapped (the loss handles wrapping).
  double forward(const std::vector<Vec3>& seq_deg_hr, LstmCache& cache) const;
  double predict(const std::vector<Vec3>& seq_deg_hr) const;

  // Accumulates d(loss)/d(params) into grad (size param_count) given
  // d(loss)/d(prediction) for the sample the cache came from.
  void backward(const LstmCache& cache, double dloss_dpred, std::vector<double>& grad) const;

 private:
  struct Block {
    std::size_t w_ih, w_hh, b;  // offsets into the flat parameter vector
  };

  std::size_t in_dim(int layer) const;
  const Block& block(int layer, int dir) const { return blocks_[static_cast<std::size_t>(layer * 2 + dir)]; }

  BiLstmConfig cfg_;
  std::vector<Block> blocks_;
  std::size_t head_fwd_w_ = 0, head_fwd_b_ = 0, head_bwd_w_ = 0, head_bwd_b_ = 0;
  std::vector<double> params_;
};

// Cyclic mean square error over a batch, in squared degrees. Residuals are
// wrapped to (-180, 180] before squaring so 359 vs 1 scores as 2 degrees.
double cmse_loss(const std::vector<double>& pred_deg, const std::vector<double>& label_deg);

// d(cmse)/d(prediction) for each batch element.
std::vector<double> cmse_gradient(const std::vector<double>& pred_deg,
                                  const std::vector<double>& label_deg);

// sqrt of the cyclic MSE, the headline accuracy metric in degrees.
double circular_rmse_deg(const std::vector<double>& pred_deg,
                         const std::vector<double>& label_deg);

struct CheckpointMeta {
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  int best_epoch = -1;
  double val_crmse_deg = 0.0;
};

void save_checkpoint(const std::string& path, const BiLstmModel& model, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  BiLstmModel model;
  CheckpointMeta meta;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace gyro
