// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BRANCHLM_DETECTOR_HPP
#define BRANCHLM_DETECTOR_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "branchlm/model.hpp"

namespace blm {

struct WindowScore {
  std::size_t start = 0;
  double score = 0.0;

  friend bool operator==(const WindowScore&, const WindowScore&) = default;
};

/// Per-sequence score report. `sequence_score` is the average negative
/// log-likelihood over the scored steps, in nats per token.
struct PerplexityReport {
  double sequence_score = 0.0;
  std::size_t token_count = 0;
  std::vector<WindowScore> window_scores;  // sorted by start, optional
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// Swept ROC curve: points sorted by ascending fpr, first (0,0), last
/// (1,1); auc is the trapezoidal integral of the points.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

enum class Verdict { Normal, Anomalous };

class EmptyScoreSetError : public std::runtime_error {
 public:
  explicit EmptyScoreSetError(const char* which)
      : std::runtime_error(std::string(which) + " score set is empty") {}
};

/// Average NLL in nats per scored token:
/// -sequence_log_probability(seq) / (len(seq) - 1).
double perplexity(const ModelParams& params, const TokenSequence& seq);

/// Whole-sequence score plus, when w > 0, sliding-window scores
/// (stride 0 defaults to w).
PerplexityReport score_trace(const ModelParams& params, const TokenSequence& seq,
                             std::size_t w = 0, std::size_t stride = 0);

/// Perplexity of each window seq[i..i+w), i = 0, stride, 2*stride, ...
/// while i+w <= len, each from the zero state. Requires w >= 2 and
/// len(seq) >= w.
std::vector<WindowScore> windowed_scores(const ModelParams& params, const TokenSequence& seq,
                                         std::size_t w, std::size_t stride);

/// Anomalous iff score > threshold (ties are Normal).
Verdict classify(double score, double threshold);

/// Sweeps thresholds over all distinct observed scores plus +/-inf
/// sentinels; positive class = attack, predicted positive iff
/// score > threshold. AUC by the trapezoid rule, which matches the
/// pair-counting identity (#{a > n} + 0.5 #{a = n}) / (|N| |A|).
RocCurve roc(const std::vector<double>& normal_scores, const std::vector<double>& attack_scores);

/// Nearest-rank quantile: sorted ascending, element ceil(q * n) - 1
/// (clamped). q in (0, 1].
double score_quantile(std::vector<double> scores, double q);

/// Perplexity of every sequence; slot-per-sequence so the parallel path
/// is bit-identical to the serial one.
std::vector<double> score_sequences_serial(const ModelParams& params,
                                           const std::vector<TokenSequence>& seqs);
std::vector<double> score_sequences_parallel(const ModelParams& params,
                                             const std::vector<TokenSequence>& seqs);

}  // namespace blm

#endif  // BRANCHLM_DETECTOR_HPP
