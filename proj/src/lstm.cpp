#include "gyrocompass/lstm.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "gyrocompass/constants.hpp"
#include "gyrocompass/error.hpp"
#include "gyrocompass/kernels.hpp"

namespace gyro {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double default_input_scale() {
  return 1.0 / (EarthConstants{}.omega_ie * kDegHrPerRadS);
}

}  // namespace

bool BiLstmConfig::valid() const {
  return num_layers >= 1 && hidden_size >= 1 && input_size == 3 &&
         std::isfinite(input_scale) && input_scale >= 0.0;
}

BiLstmModel::BiLstmModel(const BiLstmConfig& cfg) : cfg_(cfg) {
  if (!cfg_.valid()) throw invalid_input("BiLstmModel: invalid configuration");
  if (cfg_.input_scale == 0.0) cfg_.input_scale = default_input_scale();
  const auto h = static_cast<std::size_t>(cfg_.hidden_size);
  std::size_t off = 0;
  for (int l = 0; l < cfg_.num_layers; ++l) {
    const std::size_t in = in_dim(l);
    for (int d = 0; d < 2; ++d) {
      Block b{};
      b.w_ih = off;
      off += 4 * h * in;
      b.w_hh = off;
      off += 4 * h * h;
      b.b = off;
      off += 4 * h;
      blocks_.push_back(b);
    }
  }
  head_fwd_w_ = off;
  off += h;
  head_fwd_b_ = off;
  off += 1;
  head_bwd_w_ = off;
  off += h;
  head_bwd_b_ = off;
  off += 1;
  params_.assign(off, 0.0);
}

std::size_t BiLstmModel::in_dim(int layer) const {
  return layer == 0 ? static_cast<std::size_t>(cfg_.input_size)
                    : 2 * static_cast<std::size_t>(cfg_.hidden_size);
}

BiLstmModel BiLstmModel::random_init(const BiLstmConfig& cfg, std::uint64_t seed) {
  BiLstmModel m(cfg);
  const double k = 1.0 / std::sqrt(static_cast<double>(m.cfg_.hidden_size));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-k, k);
  // Parameter memory is laid out in draw order, so one linear sweep fixes the
  // stream: per layer, forward then backward direction, W_ih, W_hh, b, and
  // the two head blocks last.
  for (double& p : m.params_) p = uni(rng);
  const auto h = static_cast<std::size_t>(m.cfg_.hidden_size);
  for (const Block& b : m.blocks_)
    for (std::size_t j = 0; j < h; ++j) m.params_[b.b + h + j] += 1.0;
  return m;
}

double BiLstmModel::forward(const std::vector<Vec3>& seq_deg_hr, LstmCache& cache) const {
  const std::size_t steps = seq_deg_hr.size();
  if (steps == 0) throw invalid_input("BiLstmModel: empty input sequence");
  const auto h = static_cast<std::size_t>(cfg_.hidden_size);
  const auto layers = static_cast<std::size_t>(cfg_.num_layers);
  const kernels::Ops& ops = kernels::active();

  cache.steps = steps;
  cache.layer_in.resize(layers);
  auto reset = [&](std::vector<std::vector<double>>& v) {
    v.resize(layers * 2);
    for (auto& a : v) a.assign(steps * h, 0.0);
  };
  reset(cache.gate_i);
  reset(cache.gate_f);
  reset(cache.gate_g);
  reset(cache.gate_o);
  reset(cache.cell);
  reset(cache.cell_tanh);
  reset(cache.hidden);

  cache.layer_in[0].resize(steps * 3);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t i = 0; i < 3; ++i)
      cache.layer_in[0][t * 3 + i] = seq_deg_hr[t][i] * cfg_.input_scale;

  std::vector<double> z(4 * h);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = in_dim(static_cast<int>(l));
    const std::vector<double>& x = cache.layer_in[l];
    for (int d = 0; d < 2; ++d) {
      const Block& blk = block(static_cast<int>(l), d);
      const double* w_ih = params_.data() + blk.w_ih;
      const double* w_hh = params_.data() + blk.w_hh;
      const double* bias = params_.data() + blk.b;
      const std::size_t slot = l * 2 + static_cast<std::size_t>(d);
      auto& gi = cache.gate_i[slot];
      auto& gf = cache.gate_f[slot];
      auto& gg = cache.gate_g[slot];
      auto& go = cache.gate_o[slot];
      auto& cc = cache.cell[slot];
      auto& ct = cache.cell_tanh[slot];
      auto& hh = cache.hidden[slot];
      for (std::size_t step = 0; step < steps; ++step) {
        // The backward direction is the same cell run over the reversed
        // sequence; walking t from the other end is equivalent.
        const std::size_t t = (d == 0) ? step : steps - 1 - step;
        ops.matvec(w_ih, 4 * h, in, x.data() + t * in, z.data());
        std::size_t tp = 0;
        if (step > 0) {
          tp = (d == 0) ? t - 1 : t + 1;
          ops.matvec_acc(w_hh, 4 * h, h, hh.data() + tp * h, z.data());
        }
        for (std::size_t j = 0; j < 4 * h; ++j) z[j] += bias[j];
        for (std::size_t j = 0; j < h; ++j) {
          const double i_g = sigmoid(z[j]);
          const double f_g = sigmoid(z[h + j]);
          const double g_g = std::tanh(z[2 * h + j]);
          const double o_g = sigmoid(z[3 * h + j]);
          const double c_prev = (step > 0) ? cc[tp * h + j] : 0.0;
          const double c = f_g * c_prev + i_g * g_g;
          const double tc = std::tanh(c);
          const std::size_t at = t * h + j;
          gi[at] = i_g;
          gf[at] = f_g;
          gg[at] = g_g;
          go[at] = o_g;
          cc[at] = c;
          ct[at] = tc;
          hh[at] = o_g * tc;
        }
      }
    }
    if (l + 1 < layers) {
      auto& nx = cache.layer_in[l + 1];
      nx.resize(steps * 2 * h);
      const auto& hf = cache.hidden[l * 2];
      const auto& hb = cache.hidden[l * 2 + 1];
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t j = 0; j < h; ++j) {
          nx[t * 2 * h + j] = hf[t * h + j];
          nx[t * 2 * h + h + j] = hb[t * h + j];
        }
    }
  }

  const auto& hf = cache.hidden[(layers - 1) * 2];
  const auto& hb = cache.hidden[(layers - 1) * 2 + 1];
  double out = params_[head_fwd_b_] + params_[head_bwd_b_];
  out += ops.dot(params_.data() + head_fwd_w_, hf.data() + (steps - 1) * h, h);
  // The backward direction finishes its pass at t = 0.
  out += ops.dot(params_.data() + head_bwd_w_, hb.data(), h);
  return out;
}

double BiLstmModel::predict(const std::vector<Vec3>& seq_deg_hr) const {
  LstmCache cache;
  return forward(seq_deg_hr, cache);
}

void BiLstmModel::backward(const LstmCache& cache, double dloss_dpred,
                           std::vector<double>& grad) const {
  if (cache.steps == 0) throw invalid_input("BiLstmModel: backward before forward");
  if (grad.size() != params_.size())
    throw invalid_input("BiLstmModel: gradient buffer has the wrong size");
  const std::size_t steps = cache.steps;
  const auto h = static_cast<std::size_t>(cfg_.hidden_size);
  const auto layers = static_cast<std::size_t>(cfg_.num_layers);
  const kernels::Ops& ops = kernels::active();

  // d(loss)/d(hidden state), per layer and direction, indexed by actual time.
  std::vector<std::vector<double>> dh(layers * 2);
  for (auto& v : dh) v.assign(steps * h, 0.0);

  const auto& top_f = cache.hidden[(layers - 1) * 2];
  const auto& top_b = cache.hidden[(layers - 1) * 2 + 1];
  ops.axpy(dloss_dpred, params_.data() + head_fwd_w_, dh[(layers - 1) * 2].data() + (steps - 1) * h,
           h);
  ops.axpy(dloss_dpred, params_.data() + head_bwd_w_, dh[(layers - 1) * 2 + 1].data(), h);
  ops.axpy(dloss_dpred, top_f.data() + (steps - 1) * h, grad.data() + head_fwd_w_, h);
  ops.axpy(dloss_dpred, top_b.data(), grad.data() + head_bwd_w_, h);
  grad[head_fwd_b_] += dloss_dpred;
  grad[head_bwd_b_] += dloss_dpred;

  std::vector<double> dz(4 * h), dc(h), dh_carry(h), dx;
  for (std::size_t li = layers; li-- > 0;) {
    const std::size_t in = in_dim(static_cast<int>(li));
    const std::vector<double>& x = cache.layer_in[li];
    dx.assign(steps * in, 0.0);
    for (int d = 0; d < 2; ++d) {
      const Block& blk = block(static_cast<int>(li), d);
      const double* w_ih = params_.data() + blk.w_ih;
      const double* w_hh = params_.data() + blk.w_hh;
      const std::size_t slot = li * 2 + static_cast<std::size_t>(d);
      const auto& gi = cache.gate_i[slot];
      const auto& gf = cache.gate_f[slot];
      const auto& gg = cache.gate_g[slot];
      const auto& go = cache.gate_o[slot];
      const auto& cc = cache.cell[slot];
      const auto& ct = cache.cell_tanh[slot];
      const auto& hh = cache.hidden[slot];
      std::fill(dc.begin(), dc.end(), 0.0);
      std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
      for (std::size_t step = steps; step-- > 0;) {
        // Reverse of the processing order this direction used in forward.
        const std::size_t t = (d == 0) ? step : steps - 1 - step;
        const std::size_t tp = (d == 0) ? t - 1 : t + 1;  // only read when step > 0
        for (std::size_t j = 0; j < h; ++j) {
          const std::size_t at = t * h + j;
          const double dh_t = dh[slot][at] + dh_carry[j];
          const double do_g = dh_t * ct[at];
          const double dct = dc[j] + dh_t * go[at] * (1.0 - ct[at] * ct[at]);
          const double c_prev = (step > 0) ? cc[tp * h + j] : 0.0;
          const double di_g = dct * gg[at];
          const double df_g = dct * c_prev;
          const double dg_g = dct * gi[at];
          dc[j] = dct * gf[at];  // carried to the previous step's cell
          dz[j] = di_g * gi[at] * (1.0 - gi[at]);
          dz[h + j] = df_g * gf[at] * (1.0 - gf[at]);
          dz[2 * h + j] = dg_g * (1.0 - gg[at] * gg[at]);
          dz[3 * h + j] = do_g * go[at] * (1.0 - go[at]);
        }
        ops.outer_acc(grad.data() + blk.w_ih, 4 * h, in, dz.data(), x.data() + t * in);
        ops.axpy(1.0, dz.data(), grad.data() + blk.b, 4 * h);
        ops.matvec_t_acc(w_ih, 4 * h, in, dz.data(), dx.data() + t * in);
        if (step > 0) {
          ops.outer_acc(grad.data() + blk.w_hh, 4 * h, h, dz.data(), hh.data() + tp * h);
          std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
          ops.matvec_t_acc(w_hh, 4 * h, h, dz.data(), dh_carry.data());
        }
      }
    }
    if (li > 0) {
      auto& df = dh[(li - 1) * 2];
      auto& db = dh[(li - 1) * 2 + 1];
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t j = 0; j < h; ++j) {
          df[t * h + j] += dx[t * 2 * h + j];
          db[t * h + j] += dx[t * 2 * h + h + j];
        }
    } else {
      // dx of the bottom layer is the gradient w.r.t. the scaled raw input;
      // nothing upstream consumes it.
    }
  }
}

double cmse_loss(const std::vector<double>& pred_deg, const std::vector<double>& label_deg) {
  if (pred_deg.empty() || pred_deg.size() != label_deg.size())
    throw invalid_input("cmse_loss: batch size mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < pred_deg.size(); ++j) {
    const double e = wrap_signed_deg(label_deg[j] - pred_deg[j]);
    acc += e * e;
  }
  return acc / static_cast<double>(pred_deg.size());
}

std::vector<double> cmse_gradient(const std::vector<double>& pred_deg,
                                  const std::vector<double>& label_deg) {
  if (pred_deg.empty() || pred_deg.size() != label_deg.size())
    throw invalid_input("cmse_gradient: batch size mismatch");
  std::vector<double> g(pred_deg.size());
  const double inv_n = 1.0 / static_cast<double>(pred_deg.size());
  for (std::size_t j = 0; j < pred_deg.size(); ++j)
    g[j] = -2.0 * wrap_signed_deg(label_deg[j] - pred_deg[j]) * inv_n;
  return g;
}

double circular_rmse_deg(const std::vector<double>& pred_deg,
                         const std::vector<double>& label_deg) {
  return std::sqrt(cmse_loss(pred_deg, label_deg));
}

namespace {

nlohmann::json params_slice(const std::vector<double>& p, std::size_t off, std::size_t n) {
  return nlohmann::json(std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(off),
                                            p.begin() + static_cast<std::ptrdiff_t>(off + n)));
}

void read_slice(const nlohmann::json& j, const std::string& key, std::vector<double>& p,
                std::size_t off, std::size_t n, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) throw parse_error(path, 0, "checkpoint missing block '" + key + "'");
  if (!it->is_array() || it->size() != n)
    throw parse_error(path, 0, "checkpoint block '" + key + "' has the wrong size");
  for (std::size_t k = 0; k < n; ++k) p[off + k] = (*it)[k].get<double>();
}

}  // namespace

void save_checkpoint(const std::string& path, const BiLstmModel& model,
                     const CheckpointMeta& meta) {
  const BiLstmConfig& cfg = model.config();
  const auto h = static_cast<std::size_t>(cfg.hidden_size);
  nlohmann::json j;
  j["format"] = "gyrocompass-checkpoint";
  j["version"] = 1;
  j["num_layers"] = cfg.num_layers;
  j["hidden_size"] = cfg.hidden_size;
  j["input_size"] = cfg.input_size;
  j["input_scale"] = cfg.input_scale;
  j["init_seed"] = meta.init_seed;
  j["train_seed"] = meta.train_seed;
  j["best_epoch"] = meta.best_epoch;
  j["val_crmse_deg"] = meta.val_crmse_deg;
  j["param_count"] = model.param_count();

  // Rebuild the offsets the model uses; the layout is fixed by construction.
  const std::vector<double>& p = model.params();
  std::size_t off = 0;
  nlohmann::json blocks;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const std::size_t in = (l == 0) ? 3 : 2 * h;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string base = "layer" + std::to_string(l) + "." + dir;
      blocks[base + ".W_ih"] = params_slice(p, off, 4 * h * in);
      off += 4 * h * in;
      blocks[base + ".W_hh"] = params_slice(p, off, 4 * h * h);
      off += 4 * h * h;
      blocks[base + ".b"] = params_slice(p, off, 4 * h);
      off += 4 * h;
    }
  }
  blocks["head.fwd.w"] = params_slice(p, off, h);
  off += h;
  blocks["head.fwd.b"] = params_slice(p, off, 1);
  off += 1;
  blocks["head.bwd.w"] = params_slice(p, off, h);
  off += h;
  blocks["head.bwd.b"] = params_slice(p, off, 1);
  off += 1;
  j["params"] = std::move(blocks);

  std::ofstream out(path);
  if (!out) throw invalid_input("save_checkpoint: cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw invalid_input("save_checkpoint: write failed for '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error(path, 0, "cannot open checkpoint");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path, 0, std::string("malformed checkpoint: ") + e.what());
  }
  try {
    if (j.at("format") != "gyrocompass-checkpoint" || j.at("version").get<int>() != 1)
      throw parse_error(path, 0, "not a version-1 gyrocompass checkpoint");
    BiLstmConfig cfg;
    cfg.num_layers = j.at("num_layers").get<int>();
    cfg.hidden_size = j.at("hidden_size").get<int>();
    cfg.input_size = j.at("input_size").get<int>();
    cfg.input_scale = j.at("input_scale").get<double>();
    BiLstmModel model(cfg);
    if (j.at("param_count").get<std::size_t>() != model.param_count())
      throw parse_error(path, 0, "param_count does not match the declared shape");

    const auto h = static_cast<std::size_t>(cfg.hidden_size);
    const nlohmann::json& blocks = j.at("params");
    std::vector<double>& p = model.params();
    std::size_t off = 0;
    for (int l = 0; l < cfg.num_layers; ++l) {
      const std::size_t in = (l == 0) ? 3 : 2 * h;
      for (const char* dir : {"fwd", "bwd"}) {
        const std::string base = "layer" + std::to_string(l) + "." + dir;
        read_slice(blocks, base + ".W_ih", p, off, 4 * h * in, path);
        off += 4 * h * in;
        read_slice(blocks, base + ".W_hh", p, off, 4 * h * h, path);
        off += 4 * h * h;
        read_slice(blocks, base + ".b", p, off, 4 * h, path);
        off += 4 * h;
      }
    }
    read_slice(blocks, "head.fwd.w", p, off, h, path);
    off += h;
    read_slice(blocks, "head.fwd.b", p, off, 1, path);
    off += 1;
    read_slice(blocks, "head.bwd.w", p, off, h, path);
    off += h;
    read_slice(blocks, "head.bwd.b", p, off, 1, path);

    CheckpointMeta meta;
    meta.init_seed = j.at("init_seed").get<std::uint64_t>();
    meta.train_seed = j.at("train_seed").get<std::uint64_t>();
    meta.best_epoch = j.at("best_epoch").get<int>();
    meta.val_crmse_deg = j.at("val_crmse_deg").get<double>();
    return LoadedCheckpoint{std::move(model), meta};
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path, 0, std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace gyro
