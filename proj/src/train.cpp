#include "gyrocompass/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "gyrocompass/error.hpp"
#include "gyrocompass/frames.hpp"
#include "gyrocompass/kernels.hpp"

namespace gyro {

double dataset_crmse_deg(const BiLstmModel& model, const std::vector<Sample>& samples) {
  if (samples.empty()) throw invalid_input("dataset_crmse_deg: empty sample set");
  LstmCache cache;
  double acc = 0.0;
  for (const Sample& s : samples) {
    const double e = wrap_signed_deg(s.label_deg - model.forward(s.seq, cache));
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

TrainReport train(BiLstmModel& model, const DatasetSplit& split, const TrainConfig& cfg) {
  if (!cfg.valid()) throw invalid_input("train: invalid config");
  if (split.train.empty() || split.validation.empty())
    throw invalid_input("train: training and validation sets must be non-empty");

  const auto t0 = std::chrono::steady_clock::now();
  const kernels::Ops& ops = kernels::active();
  const std::size_t n_params = model.param_count();
  const std::size_t n_train = split.train.size();

  std::vector<std::size_t> order(n_train);
  for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
  std::mt19937_64 rng(cfg.seed);

  std::vector<double> grad(n_params), adam_m, adam_v;
  if (cfg.optimizer == Optimizer::adam) {
    adam_m.assign(n_params, 0.0);
    adam_v.assign(n_params, 0.0);
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  constexpr double kClipNorm = 5.0;
  long adam_t = 0;

  TrainReport report;
  std::vector<double> best_params = model.params();
  double best_val = std::numeric_limits<double>::infinity();

  LstmCache cache;
  std::vector<double> preds, labels;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);

    double sq_err_sum = 0.0;
    for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t bsz = end - start;
      preds.resize(bsz);
      labels.resize(bsz);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t j = 0; j < bsz; ++j) {
        const Sample& s = split.train[order[start + j]];
        preds[j] = model.forward(s.seq, cache);
        labels[j] = s.label_deg;
        // One more forward right before backward would repeat work; the cache
        // from this forward is exactly what backward needs.
        const double e = wrap_signed_deg(labels[j] - preds[j]);
        sq_err_sum += e * e;
        model.backward(cache, -2.0 * e / static_cast<double>(bsz), grad);
      }
      const double batch_loss = cmse_loss(preds, labels);
      if (!std::isfinite(batch_loss))
        throw training_diverged("train: non-finite loss at epoch " + std::to_string(epoch));

      const double gnorm = std::sqrt(ops.sumsq(grad.data(), n_params));
      if (!std::isfinite(gnorm))
        throw training_diverged("train: non-finite gradient at epoch " + std::to_string(epoch));
      const double scale = (gnorm > kClipNorm) ? kClipNorm / gnorm : 1.0;

      std::vector<double>& p = model.params();
      if (cfg.optimizer == Optimizer::adam) {
        ++adam_t;
        const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_t));
        const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_t));
        for (std::size_t k = 0; k < n_params; ++k) {
          const double gk = grad[k] * scale;
          adam_m[k] = kBeta1 * adam_m[k] + (1.0 - kBeta1) * gk;
          adam_v[k] = kBeta2 * adam_v[k] + (1.0 - kBeta2) * gk * gk;
          p[k] -= cfg.learning_rate * (adam_m[k] / bc1) / (std::sqrt(adam_v[k] / bc2) + kAdamEps);
        }
      } else {
        ops.axpy(-cfg.learning_rate * scale, grad.data(), p.data(), n_params);
      }
    }

    report.train_crmse_deg.push_back(std::sqrt(sq_err_sum / static_cast<double>(n_train)));
    const double val = dataset_crmse_deg(model, split.validation);
    report.val_crmse_deg.push_back(val);
    if (!std::isfinite(val))
      throw training_diverged("train: non-finite validation loss at epoch " + std::to_string(epoch));
    if (val < best_val) {
      best_val = val;
      report.best_epoch = epoch;
      best_params = model.params();
    }
    if (cfg.patience.has_value() && epoch - report.best_epoch >= *cfg.patience) break;
  }

  model.params() = best_params;
  report.best_val_crmse_deg = best_val;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace gyro
