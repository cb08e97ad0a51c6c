// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "branchlm/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blm {

double perplexity(const ModelParams& params, const TokenSequence& seq) {
  const std::size_t l = seq.indices.size();
  if (l < 2) throw SequenceTooShortError(l);
  return -sequence_log_probability(params, seq) / static_cast<double>(l - 1);
}

std::vector<WindowScore> windowed_scores(const ModelParams& params, const TokenSequence& seq,
                                         std::size_t w, std::size_t stride) {
  if (w < 2) throw std::invalid_argument("window size must be >= 2");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (seq.indices.size() < w) throw SequenceTooShortError(seq.indices.size());

  std::vector<WindowScore> scores;
  TokenSequence window;
  window.segment_index = seq.segment_index;
  for (std::size_t i = 0; i + w <= seq.indices.size(); i += stride) {
    window.indices.assign(seq.indices.begin() + static_cast<std::ptrdiff_t>(i),
                          seq.indices.begin() + static_cast<std::ptrdiff_t>(i + w));
    scores.push_back({i, perplexity(params, window)});
  }
  return scores;
}

PerplexityReport score_trace(const ModelParams& params, const TokenSequence& seq, std::size_t w,
                             std::size_t stride) {
  PerplexityReport report;
  report.sequence_score = perplexity(params, seq);
  report.token_count = seq.indices.size();
  if (w > 0) {
    report.window_scores = windowed_scores(params, seq, w, stride == 0 ? w : stride);
  }
  return report;
}

Verdict classify(double score, double threshold) {
  return score > threshold ? Verdict::Anomalous : Verdict::Normal;
}

RocCurve roc(const std::vector<double>& normal_scores, const std::vector<double>& attack_scores) {
  if (normal_scores.empty()) throw EmptyScoreSetError("normal");
  if (attack_scores.empty()) throw EmptyScoreSetError("attack");

  std::vector<double> normal = normal_scores;
  std::vector<double> attack = attack_scores;
  std::sort(normal.begin(), normal.end());
  std::sort(attack.begin(), attack.end());

  std::vector<double> thresholds;
  thresholds.reserve(normal.size() + attack.size() + 2);
  thresholds.push_back(std::numeric_limits<double>::infinity());
  {
    // Distinct observed scores, descending.
    std::vector<double> merged;
    merged.reserve(normal.size() + attack.size());
    merged.insert(merged.end(), normal.begin(), normal.end());
    merged.insert(merged.end(), attack.begin(), attack.end());
    std::sort(merged.begin(), merged.end(), std::greater<>());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    thresholds.insert(thresholds.end(), merged.begin(), merged.end());
  }
  thresholds.push_back(-std::numeric_limits<double>::infinity());

  const double n_normal = static_cast<double>(normal.size());
  const double n_attack = static_cast<double>(attack.size());

  RocCurve curve;
  curve.points.reserve(thresholds.size());
  for (double t : thresholds) {
    // count of scores strictly above t, via the first element > t
    const auto above = [&](const std::vector<double>& sorted) {
      return static_cast<double>(sorted.end() -
                                 std::upper_bound(sorted.begin(), sorted.end(), t));
    };
    curve.points.push_back({above(normal) / n_normal, above(attack) / n_attack, t});
  }

  double auc = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  curve.auc = auc;
  return curve;
}

double score_quantile(std::vector<double> scores, double q) {
  if (scores.empty()) throw EmptyScoreSetError("quantile");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("quantile must be in (0, 1]");
  std::sort(scores.begin(), scores.end());
  const double rank = std::ceil(q * static_cast<double>(scores.size()));
  std::size_t index = rank <= 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  index = std::min(index, scores.size() - 1);
  return scores[index];
}

std::vector<double> score_sequences_serial(const ModelParams& params,
                                           const std::vector<TokenSequence>& seqs) {
  std::vector<double> scores(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    scores[i] = perplexity(params, seqs[i]);
  }
  return scores;
}

std::vector<double> score_sequences_parallel(const ModelParams& params,
                                             const std::vector<TokenSequence>& seqs) {
  std::vector<double> scores(seqs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(seqs.size()); ++i) {
    scores[static_cast<std::size_t>(i)] = perplexity(params, seqs[static_cast<std::size_t>(i)]);
  }
  return scores;
}

}  // namespace blm
