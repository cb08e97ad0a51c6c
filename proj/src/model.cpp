// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "branchlm/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "branchlm/rng.hpp"

namespace blm {

namespace {

ModelParams make_params(std::uint32_t k, std::uint32_t d_e, std::uint32_t d_h) {
  ModelParams p;
  p.embed = Eigen::MatrixXd::Zero(k, d_e);
  p.w_input = Eigen::MatrixXd::Zero(d_h, d_e);
  p.u_input = Eigen::MatrixXd::Zero(d_h, d_h);
  p.b_input = Eigen::VectorXd::Zero(d_h);
  p.w_forget = Eigen::MatrixXd::Zero(d_h, d_e);
  p.u_forget = Eigen::MatrixXd::Zero(d_h, d_h);
  p.b_forget = Eigen::VectorXd::Zero(d_h);
  p.w_outgate = Eigen::MatrixXd::Zero(d_h, d_e);
  p.u_outgate = Eigen::MatrixXd::Zero(d_h, d_h);
  p.b_outgate = Eigen::VectorXd::Zero(d_h);
  p.w_cell = Eigen::MatrixXd::Zero(d_h, d_e);
  p.u_cell = Eigen::MatrixXd::Zero(d_h, d_h);
  p.b_cell = Eigen::VectorXd::Zero(d_h);
  p.proj = Eigen::MatrixXd::Zero(k, d_h);
  p.proj_bias = Eigen::VectorXd::Zero(k);
  return p;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Per-window forward caches for BPTT. Columns are time steps.
struct ForwardCache {
  Eigen::MatrixXd gate_i, gate_f, gate_o, gate_g;  // d_h x T
  Eigen::MatrixXd cell, tanh_cell, hidden;         // d_h x T
  Eigen::MatrixXd probs;                           // K x T
};

/// Runs the window forward and returns the mean NLL over the T = l-1
/// prediction steps. Fills `cache` when non-null; the arithmetic is
/// identical either way.
double forward_window(const ModelParams& params, const TokenSequence& window,
                      ForwardCache* cache) {
  const Eigen::Index l = static_cast<Eigen::Index>(window.indices.size());
  if (l < 2) throw SequenceTooShortError(window.indices.size());
  const Eigen::Index steps = l - 1;
  const Eigen::Index d_h = params.w_input.rows();
  const Eigen::Index k = params.proj.rows();

  if (cache != nullptr) {
    cache->gate_i.resize(d_h, steps);
    cache->gate_f.resize(d_h, steps);
    cache->gate_o.resize(d_h, steps);
    cache->gate_g.resize(d_h, steps);
    cache->cell.resize(d_h, steps);
    cache->tanh_cell.resize(d_h, steps);
    cache->hidden.resize(d_h, steps);
    cache->probs.resize(k, steps);
  }

  Eigen::VectorXd h = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd gi(d_h), gf(d_h), go(d_h), gg(d_h), tc(d_h);
  Eigen::VectorXd logits(k), probs(k);

  double loss = 0.0;
  for (Eigen::Index t = 0; t < steps; ++t) {
    const std::uint32_t x = window.indices[static_cast<std::size_t>(t)];
    const std::uint32_t y = window.indices[static_cast<std::size_t>(t) + 1];
    const auto e = params.embed.row(x).transpose();

    gi.noalias() = params.w_input * e + params.u_input * h;
    gi += params.b_input;
    gf.noalias() = params.w_forget * e + params.u_forget * h;
    gf += params.b_forget;
    go.noalias() = params.w_outgate * e + params.u_outgate * h;
    go += params.b_outgate;
    gg.noalias() = params.w_cell * e + params.u_cell * h;
    gg += params.b_cell;

    gi = gi.unaryExpr([](double v) { return sigmoid(v); });
    gf = gf.unaryExpr([](double v) { return sigmoid(v); });
    go = go.unaryExpr([](double v) { return sigmoid(v); });
    gg = gg.array().tanh();

    c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
    tc = c.array().tanh();
    h = go.cwiseProduct(tc);

    logits.noalias() = params.proj * h;
    logits += params.proj_bias;
    const double zmax = logits.maxCoeff();
    probs = (logits.array() - zmax).exp();
    probs /= probs.sum();

    loss += -std::log(probs[y]);

    if (cache != nullptr) {
      cache->gate_i.col(t) = gi;
      cache->gate_f.col(t) = gf;
      cache->gate_o.col(t) = go;
      cache->gate_g.col(t) = gg;
      cache->cell.col(t) = c;
      cache->tanh_cell.col(t) = tc;
      cache->hidden.col(t) = h;
      cache->probs.col(t) = probs;
    }
  }
  return loss / static_cast<double>(steps);
}

void add_scaled(ModelParams& dst, const ModelParams& src, double scale) {
  auto d = param_views(dst);
  auto s = param_views(src);
  for (std::size_t v = 0; v < d.size(); ++v) {
    const Eigen::Index n = d[v].size();
    for (Eigen::Index i = 0; i < n; ++i) {
      d[v].data[i] += scale * s[v].data[i];
    }
  }
}

void add_inplace(ModelParams& dst, const ModelParams& src) {
  auto d = param_views(dst);
  auto s = param_views(src);
  for (std::size_t v = 0; v < d.size(); ++v) {
    const Eigen::Index n = d[v].size();
    for (Eigen::Index i = 0; i < n; ++i) {
      d[v].data[i] += s[v].data[i];
    }
  }
}

void scale_inplace(ModelParams& p, double scale) {
  for (ParamView& view : param_views(p)) {
    const Eigen::Index n = view.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      view.data[i] *= scale;
    }
  }
}

double squared_norm(const ModelParams& p) {
  double sq = 0.0;
  for (const ParamView& view : param_views(p)) {
    const Eigen::Index n = view.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      sq += view.data[i] * view.data[i];
    }
  }
  return sq;
}

void write_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t read_u32_le(const std::vector<std::uint8_t>& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  return v;
}

}  // namespace

ModelParams ModelParams::zeros_like(const ModelParams& p) {
  return make_params(p.vocab_size(), p.embed_dim(), p.hidden_dim());
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  auto va = param_views(a);
  auto vb = param_views(b);
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (va[i].rows != vb[i].rows || va[i].cols != vb[i].cols) return false;
    if (std::memcmp(va[i].data, vb[i].data,
                    static_cast<std::size_t>(va[i].size()) * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

std::vector<ParamView> param_views(ModelParams& p) {
  return {
      {"embed", p.embed.data(), p.embed.rows(), p.embed.cols()},
      {"w_input", p.w_input.data(), p.w_input.rows(), p.w_input.cols()},
      {"u_input", p.u_input.data(), p.u_input.rows(), p.u_input.cols()},
      {"b_input", p.b_input.data(), p.b_input.rows(), 1},
      {"w_forget", p.w_forget.data(), p.w_forget.rows(), p.w_forget.cols()},
      {"u_forget", p.u_forget.data(), p.u_forget.rows(), p.u_forget.cols()},
      {"b_forget", p.b_forget.data(), p.b_forget.rows(), 1},
      {"w_outgate", p.w_outgate.data(), p.w_outgate.rows(), p.w_outgate.cols()},
      {"u_outgate", p.u_outgate.data(), p.u_outgate.rows(), p.u_outgate.cols()},
      {"b_outgate", p.b_outgate.data(), p.b_outgate.rows(), 1},
      {"w_cell", p.w_cell.data(), p.w_cell.rows(), p.w_cell.cols()},
      {"u_cell", p.u_cell.data(), p.u_cell.rows(), p.u_cell.cols()},
      {"b_cell", p.b_cell.data(), p.b_cell.rows(), 1},
      {"proj", p.proj.data(), p.proj.rows(), p.proj.cols()},
      {"proj_bias", p.proj_bias.data(), p.proj_bias.rows(), 1},
  };
}

std::vector<ParamView> param_views(const ModelParams& p) {
  return param_views(const_cast<ModelParams&>(p));
}

ModelParams init_model(const ModelConfig& config) {
  if (config.vocab_size < 2 || config.embed_dim < 1 || config.hidden_dim < 1 ||
      config.window_len < 2) {
    throw std::invalid_argument("invalid model configuration");
  }
  ModelParams p = make_params(config.vocab_size, config.embed_dim, config.hidden_dim);

  SplitMix64 rng(config.seed);
  auto fill = [&rng](Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = -0.08 + 0.16 * rng.next_double();
      }
    }
  };
  fill(p.embed);
  fill(p.w_input);
  fill(p.u_input);
  fill(p.w_forget);
  fill(p.u_forget);
  fill(p.w_outgate);
  fill(p.u_outgate);
  fill(p.w_cell);
  fill(p.u_cell);
  fill(p.proj);
  p.b_forget.setOnes();
  return p;
}

std::pair<StepOutput, HiddenState> step(const ModelParams& params, const HiddenState& state,
                                        std::uint32_t token_index) {
  if (token_index >= params.vocab_size()) {
    throw std::out_of_range("token index exceeds vocabulary size");
  }
  const auto e = params.embed.row(token_index).transpose();

  Eigen::VectorXd gi = params.w_input * e + params.u_input * state.h + params.b_input;
  Eigen::VectorXd gf = params.w_forget * e + params.u_forget * state.h + params.b_forget;
  Eigen::VectorXd go = params.w_outgate * e + params.u_outgate * state.h + params.b_outgate;
  Eigen::VectorXd gg = params.w_cell * e + params.u_cell * state.h + params.b_cell;
  gi = gi.unaryExpr([](double v) { return sigmoid(v); });
  gf = gf.unaryExpr([](double v) { return sigmoid(v); });
  go = go.unaryExpr([](double v) { return sigmoid(v); });
  gg = gg.array().tanh();

  HiddenState next;
  next.c = gf.cwiseProduct(state.c) + gi.cwiseProduct(gg);
  next.h = go.cwiseProduct(next.c.array().tanh().matrix());

  Eigen::VectorXd logits = params.proj * next.h + params.proj_bias;
  const double zmax = logits.maxCoeff();
  StepOutput out;
  out.probs = (logits.array() - zmax).exp();
  out.probs /= out.probs.sum();
  return {std::move(out), std::move(next)};
}

double sequence_log_probability(const ModelParams& params, const TokenSequence& seq) {
  const std::size_t l = seq.indices.size();
  if (l < 2) throw SequenceTooShortError(l);
  const Eigen::Index d_h = params.w_input.rows();
  const Eigen::Index k = params.proj.rows();

  Eigen::VectorXd h = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd gi(d_h), gf(d_h), go(d_h), gg(d_h);
  Eigen::VectorXd logits(k), probs(k);

  double log_prob = 0.0;
  for (std::size_t t = 0; t + 1 < l; ++t) {
    const std::uint32_t x = seq.indices[t];
    const std::uint32_t y = seq.indices[t + 1];
    const auto e = params.embed.row(x).transpose();

    gi.noalias() = params.w_input * e + params.u_input * h;
    gi += params.b_input;
    gf.noalias() = params.w_forget * e + params.u_forget * h;
    gf += params.b_forget;
    go.noalias() = params.w_outgate * e + params.u_outgate * h;
    go += params.b_outgate;
    gg.noalias() = params.w_cell * e + params.u_cell * h;
    gg += params.b_cell;
    gi = gi.unaryExpr([](double v) { return sigmoid(v); });
    gf = gf.unaryExpr([](double v) { return sigmoid(v); });
    go = go.unaryExpr([](double v) { return sigmoid(v); });
    gg = gg.array().tanh();

    c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
    h = go.cwiseProduct(c.array().tanh().matrix());

    logits.noalias() = params.proj * h;
    logits += params.proj_bias;
    const double zmax = logits.maxCoeff();
    probs = (logits.array() - zmax).exp();
    probs /= probs.sum();

    log_prob += std::log(probs[y]);
  }
  return log_prob;
}

double window_loss(const ModelParams& params, const TokenSequence& window) {
  return forward_window(params, window, nullptr);
}

std::pair<double, ModelParams> loss_and_gradients(const ModelParams& params,
                                                  const TokenSequence& window) {
  ForwardCache cache;
  const double loss = forward_window(params, window, &cache);

  const Eigen::Index steps = cache.hidden.cols();
  const Eigen::Index d_h = params.w_input.rows();
  const double inv_steps = 1.0 / static_cast<double>(steps);

  ModelParams grads = ModelParams::zeros_like(params);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(d_h);
  Eigen::VectorXd dz, dh(d_h), dc(d_h), di(d_h), df(d_h), dgo(d_h), dg(d_h), de;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d_h);

  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const std::uint32_t x = window.indices[static_cast<std::size_t>(t)];
    const std::uint32_t y = window.indices[static_cast<std::size_t>(t) + 1];
    const auto e = params.embed.row(x).transpose();
    const Eigen::Map<const Eigen::VectorXd> h_prev(
        t > 0 ? cache.hidden.col(t - 1).data() : zero.data(), d_h);
    const Eigen::Map<const Eigen::VectorXd> c_prev(
        t > 0 ? cache.cell.col(t - 1).data() : zero.data(), d_h);
    const auto gi = cache.gate_i.col(t);
    const auto gf = cache.gate_f.col(t);
    const auto go = cache.gate_o.col(t);
    const auto gg = cache.gate_g.col(t);
    const auto tc = cache.tanh_cell.col(t);

    // Softmax cross-entropy: d loss / d logits = (p - onehot(y)) / steps.
    dz = cache.probs.col(t) * inv_steps;
    dz[y] -= inv_steps;

    grads.proj.noalias() += dz * cache.hidden.col(t).transpose();
    grads.proj_bias += dz;

    dh.noalias() = params.proj.transpose() * dz;
    dh += dh_next;

    dc = dh.cwiseProduct(go).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;

    dgo = dh.cwiseProduct(tc).cwiseProduct(go).cwiseProduct((1.0 - go.array()).matrix());
    di = dc.cwiseProduct(gg).cwiseProduct(gi).cwiseProduct((1.0 - gi.array()).matrix());
    df = dc.cwiseProduct(c_prev).cwiseProduct(gf).cwiseProduct((1.0 - gf.array()).matrix());
    dg = dc.cwiseProduct(gi).cwiseProduct((1.0 - gg.array().square()).matrix());

    grads.w_input.noalias() += di * e.transpose();
    grads.u_input.noalias() += di * h_prev.transpose();
    grads.b_input += di;
    grads.w_forget.noalias() += df * e.transpose();
    grads.u_forget.noalias() += df * h_prev.transpose();
    grads.b_forget += df;
    grads.w_outgate.noalias() += dgo * e.transpose();
    grads.u_outgate.noalias() += dgo * h_prev.transpose();
    grads.b_outgate += dgo;
    grads.w_cell.noalias() += dg * e.transpose();
    grads.u_cell.noalias() += dg * h_prev.transpose();
    grads.b_cell += dg;

    de.noalias() = params.w_input.transpose() * di;
    de.noalias() += params.w_forget.transpose() * df;
    de.noalias() += params.w_outgate.transpose() * dgo;
    de.noalias() += params.w_cell.transpose() * dg;
    grads.embed.row(x) += de.transpose();

    dh_next.noalias() = params.u_input.transpose() * di;
    dh_next.noalias() += params.u_forget.transpose() * df;
    dh_next.noalias() += params.u_outgate.transpose() * dgo;
    dh_next.noalias() += params.u_cell.transpose() * dg;
    dc_next = dc.cwiseProduct(gf);
  }
  return {loss, std::move(grads)};
}

BatchResult batch_loss_and_gradients_serial(const ModelParams& params,
                                            std::span<const TokenSequence> windows) {
  BatchResult result;
  result.grads = ModelParams::zeros_like(params);
  for (const TokenSequence& w : windows) {
    auto [loss, grads] = loss_and_gradients(params, w);
    result.loss += loss;
    add_inplace(result.grads, grads);
  }
  if (!windows.empty()) {
    const double inv_n = 1.0 / static_cast<double>(windows.size());
    result.loss *= inv_n;
    scale_inplace(result.grads, inv_n);
  }
  return result;
}

BatchResult batch_loss_and_gradients_parallel(const ModelParams& params,
                                              std::span<const TokenSequence> windows) {
  const std::size_t n = windows.size();
  std::vector<double> losses(n);
  std::vector<ModelParams> slots(n);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    auto [loss, grads] = loss_and_gradients(params, windows[static_cast<std::size_t>(i)]);
    losses[static_cast<std::size_t>(i)] = loss;
    slots[static_cast<std::size_t>(i)] = std::move(grads);
  }

  // Reduce in window order; bitwise identical to the serial reference.
  BatchResult result;
  result.grads = ModelParams::zeros_like(params);
  for (std::size_t i = 0; i < n; ++i) {
    result.loss += losses[i];
    add_inplace(result.grads, slots[i]);
  }
  if (n > 0) {
    const double inv_n = 1.0 / static_cast<double>(n);
    result.loss *= inv_n;
    scale_inplace(result.grads, inv_n);
  }
  return result;
}

namespace {

double mean_validation_loss(const ModelParams& params,
                            const std::vector<TokenSequence>& validation, bool parallel) {
  if (validation.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> losses(validation.size());
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(validation.size()); ++i) {
      losses[static_cast<std::size_t>(i)] =
          window_loss(params, validation[static_cast<std::size_t>(i)]);
    }
  } else {
    for (std::size_t i = 0; i < validation.size(); ++i) {
      losses[i] = window_loss(params, validation[i]);
    }
  }
  double sum = 0.0;
  for (double v : losses) sum += v;
  return sum / static_cast<double>(validation.size());
}

}  // namespace

TrainResult train(ModelParams params, const DatasetSplit& data, const ModelConfig& config,
                  bool parallel) {
  if (data.train.empty()) throw EmptyTrainingSetError();
  if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (config.learning_rate < 0.0) throw std::invalid_argument("learning rate must be >= 0");

  std::vector<TokenSequence> windows = data.train;
  const std::size_t n = windows.size();
  SplitMix64 rng(config.seed);

  TrainResult result;
  result.history.reserve(config.epochs);

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.next_below(i));
      std::swap(windows[i - 1], windows[j]);
    }

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const std::size_t count = std::min<std::size_t>(config.batch_size, n - start);
      std::span<const TokenSequence> batch(windows.data() + start, count);
      BatchResult br = parallel ? batch_loss_and_gradients_parallel(params, batch)
                                : batch_loss_and_gradients_serial(params, batch);
      if (!std::isfinite(br.loss)) {
        throw NumericFailureError(epoch, batch_index, "training loss is not finite");
      }
      loss_sum += br.loss * static_cast<double>(count);

      const double norm = std::sqrt(squared_norm(br.grads));
      if (norm > config.clip_norm) {
        scale_inplace(br.grads, config.clip_norm / norm);
      }
      add_scaled(params, br.grads, -config.learning_rate);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.validation_loss = mean_validation_loss(params, data.validation, parallel);
    if (!data.validation.empty() && !std::isfinite(stats.validation_loss)) {
      throw NumericFailureError(epoch, batch_index, "validation loss is not finite");
    }
    result.history.push_back(stats);
  }

  result.params = std::move(params);
  return result;
}

std::vector<std::uint8_t> save_checkpoint(const ModelParams& params) {
  std::vector<std::uint8_t> out;
  auto views = param_views(params);
  std::uint64_t n_doubles = 0;
  for (const ParamView& v : views) n_doubles += static_cast<std::uint64_t>(v.size());
  out.reserve(20 + 8 * n_doubles);

  out.insert(out.end(), {'B', 'L', 'M', '1'});
  write_u32_le(out, 1);
  write_u32_le(out, params.vocab_size());
  write_u32_le(out, params.embed_dim());
  write_u32_le(out, params.hidden_dim());

  for (const ParamView& v : views) {
    for (Eigen::Index r = 0; r < v.rows; ++r) {
      for (Eigen::Index c = 0; c < v.cols; ++c) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(v.data[c * v.rows + r]);
        for (int i = 0; i < 8; ++i) {
          out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
      }
    }
  }
  return out;
}

ModelParams load_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) {
    throw CheckpointError(CheckpointError::Reason::Truncated, "shorter than magic");
  }
  if (std::memcmp(bytes.data(), "BLM1", 4) != 0) {
    throw CheckpointError(CheckpointError::Reason::BadMagic, "bad magic");
  }
  if (bytes.size() < 20) {
    throw CheckpointError(CheckpointError::Reason::Truncated, "header truncated");
  }
  const std::uint32_t version = read_u32_le(bytes, 4);
  if (version != 1) {
    throw CheckpointError(CheckpointError::Reason::VersionMismatch,
                          "unsupported version " + std::to_string(version));
  }
  const std::uint32_t k = read_u32_le(bytes, 8);
  const std::uint32_t d_e = read_u32_le(bytes, 12);
  const std::uint32_t d_h = read_u32_le(bytes, 16);
  constexpr std::uint32_t kDimCap = 1u << 24;
  if (k < 2 || d_e < 1 || d_h < 1 || k > kDimCap || d_e > kDimCap || d_h > kDimCap) {
    throw CheckpointError(CheckpointError::Reason::ShapeMismatch,
                          "implausible dimensions in header");
  }

  ModelParams params = make_params(k, d_e, d_h);
  auto views = param_views(params);
  std::uint64_t n_doubles = 0;
  for (const ParamView& v : views) n_doubles += static_cast<std::uint64_t>(v.size());
  const std::uint64_t expected = 20 + 8 * n_doubles;
  if (bytes.size() < expected) {
    throw CheckpointError(CheckpointError::Reason::Truncated,
                          "payload shorter than the header requires");
  }
  if (bytes.size() > expected) {
    throw CheckpointError(CheckpointError::Reason::ShapeMismatch,
                          "trailing bytes after payload");
  }

  std::size_t pos = 20;
  for (ParamView& v : views) {
    for (Eigen::Index r = 0; r < v.rows; ++r) {
      for (Eigen::Index c = 0; c < v.cols; ++c) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) {
          bits |= static_cast<std::uint64_t>(bytes[pos + static_cast<std::size_t>(i)]) << (8 * i);
        }
        pos += 8;
        v.data[c * v.rows + r] = std::bit_cast<double>(bits);
      }
    }
  }
  return params;
}

}  // namespace blm
