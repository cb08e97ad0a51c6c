// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BRANCHLM_MODEL_HPP
#define BRANCHLM_MODEL_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "branchlm/corpus.hpp"

namespace blm {

/// Hyperparameters. Sizes are data-dependent; the optimizer defaults are
/// chosen for desk-scale runtime.
struct ModelConfig {
  std::uint32_t vocab_size = 1024;  // K
  std::uint32_t embed_dim = 32;     // d_e
  std::uint32_t hidden_dim = 128;   // d_h
  std::uint32_t window_len = 64;    // l
  double learning_rate = 0.1;
  std::uint32_t epochs = 10;
  double clip_norm = 5.0;
  std::uint32_t batch_size = 32;
  std::uint64_t seed = 0;
};

/// The learned branch model: embedding -> single LSTM layer -> softmax
/// projection over the vocabulary. All arithmetic is double precision.
struct ModelParams {
  Eigen::MatrixXd embed;  // K x d_e, row per vocabulary index

  Eigen::MatrixXd w_input;   // d_h x d_e
  Eigen::MatrixXd u_input;   // d_h x d_h
  Eigen::VectorXd b_input;   // d_h
  Eigen::MatrixXd w_forget;  // d_h x d_e
  Eigen::MatrixXd u_forget;  // d_h x d_h
  Eigen::VectorXd b_forget;  // d_h
  Eigen::MatrixXd w_outgate; // d_h x d_e
  Eigen::MatrixXd u_outgate; // d_h x d_h
  Eigen::VectorXd b_outgate; // d_h
  Eigen::MatrixXd w_cell;    // d_h x d_e
  Eigen::MatrixXd u_cell;    // d_h x d_h
  Eigen::VectorXd b_cell;    // d_h

  Eigen::MatrixXd proj;      // K x d_h output projection
  Eigen::VectorXd proj_bias; // K

  std::uint32_t vocab_size() const { return static_cast<std::uint32_t>(embed.rows()); }
  std::uint32_t embed_dim() const { return static_cast<std::uint32_t>(embed.cols()); }
  std::uint32_t hidden_dim() const { return static_cast<std::uint32_t>(w_input.rows()); }

  /// Same shapes, all entries zero. Used for gradient accumulators.
  static ModelParams zeros_like(const ModelParams& p);

  friend bool operator==(const ModelParams&, const ModelParams&);
};

/// Flat view over one parameter tensor (column-major storage).
struct ParamView {
  const char* name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const { return rows * cols; }
};

/// Views over all 15 tensors, in checkpoint order. Shared by the clip /
/// update loops, the checkpoint codec, and the gradient-check tests.
std::vector<ParamView> param_views(ModelParams& p);
std::vector<ParamView> param_views(const ModelParams& p);  // const-cast views; do not write

struct HiddenState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;

  static HiddenState zero(std::uint32_t hidden_dim) {
    return {Eigen::VectorXd::Zero(hidden_dim), Eigen::VectorXd::Zero(hidden_dim)};
  }
};

/// Next-token distribution P(x_i | x_{1:i-1}); entries positive, sum 1.
struct StepOutput {
  Eigen::VectorXd probs;
};

class SequenceTooShortError : public std::runtime_error {
 public:
  explicit SequenceTooShortError(std::size_t length)
      : std::runtime_error("sequence of length " + std::to_string(length) +
                           " is too short to score (need >= 2 tokens)") {}
};

class EmptyTrainingSetError : public std::runtime_error {
 public:
  EmptyTrainingSetError() : std::runtime_error("training set is empty") {}
};

class NumericFailureError : public std::runtime_error {
 public:
  NumericFailureError(std::uint32_t epoch, std::size_t batch, const std::string& what)
      : std::runtime_error("numeric failure at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch) + ": " + what),
        epoch_(epoch),
        batch_(batch) {}

  std::uint32_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::uint32_t epoch_;
  std::size_t batch_;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Reason { BadMagic, VersionMismatch, Truncated, ShapeMismatch };

  CheckpointError(Reason reason, const std::string& what)
      : std::runtime_error("checkpoint error: " + what), reason_(reason) {}

  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

/// Weights drawn uniformly from [-0.08, 0.08] under SplitMix64(seed),
/// filled row-major in checkpoint order; forget-gate bias 1.0, other
/// biases zero. Deterministic given the seed.
ModelParams init_model(const ModelConfig& config);

/// One recurrent step. e = embed row of the token; gates
/// i = sigmoid(W_i e + U_i h + b_i), f, o likewise, g = tanh(...);
/// c' = f.*c + i.*g; h' = o.*tanh(c'); probs = softmax(proj h' + bias)
/// with max-subtraction.
std::pair<StepOutput, HiddenState> step(const ModelParams& params, const HiddenState& state,
                                        std::uint32_t token_index);

/// log P(x) = sum_{i=2}^{l} log P(x_i | x_{1:i-1}), run from the zero
/// state. The first token conditions but is not scored.
double sequence_log_probability(const ModelParams& params, const TokenSequence& seq);

/// Mean NLL over the l-1 prediction steps of the window (forward only).
double window_loss(const ModelParams& params, const TokenSequence& window);

/// Mean NLL over the window plus the exact loss gradient for every
/// parameter, by backpropagation through time over the full window.
/// State starts at zero; nothing carries across windows.
std::pair<double, ModelParams> loss_and_gradients(const ModelParams& params,
                                                  const TokenSequence& window);

/// Mean loss and mean gradients over a batch of windows, accumulated in
/// window order so results are bit-deterministic.
struct BatchResult {
  double loss = 0.0;
  ModelParams grads;
};

/// Reference implementation: one window at a time, in order.
BatchResult batch_loss_and_gradients_serial(const ModelParams& params,
                                            std::span<const TokenSequence> windows);

/// OpenMP implementation: per-window gradients computed in parallel, then
/// reduced in window order. Bit-identical to the serial reference.
BatchResult batch_loss_and_gradients_parallel(const ModelParams& params,
                                              std::span<const TokenSequence> windows);

struct EpochStats {
  double train_loss = 0.0;
  double validation_loss = 0.0;  // NaN when the validation set is empty
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

/// Plain SGD with global-norm gradient clipping. Each epoch: seeded
/// shuffle of the training windows, batches of batch_size with mean
/// gradients, clip to clip_norm, update at learning_rate, then record
/// mean train / validation loss. Deterministic given config.seed, with or
/// without OpenMP.
TrainResult train(ModelParams params, const DatasetSplit& data, const ModelConfig& config,
                  bool parallel = true);

/// Checkpoint codec (.blm), byte-exact: magic `BLM1`; four little-endian
/// u32 fields version=1, K, d_e, d_h; then the tensors as row-major
/// IEEE-754 little-endian doubles in checkpoint order. No padding.
std::vector<std::uint8_t> save_checkpoint(const ModelParams& params);
ModelParams load_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace blm

#endif  // BRANCHLM_MODEL_HPP
