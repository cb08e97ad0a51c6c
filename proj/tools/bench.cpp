// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

// Times the serial reference against the OpenMP kernels for batch BPTT
// gradients and bulk trace scoring, and checks the results stay
// bit-identical while doing so.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "branchlm/detector.hpp"
#include "branchlm/model.hpp"
#include "branchlm/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

blm::TokenSequence random_window(blm::SplitMix64& rng, std::uint32_t k, std::size_t length) {
  blm::TokenSequence seq;
  for (std::size_t i = 0; i < length; ++i) {
    seq.indices.push_back(static_cast<std::uint32_t>(rng.next_below(k)));
  }
  return seq;
}

}  // namespace

int main(int argc, char** argv) {
  // bench [vocab] [window_len] [batch] [reps]
  const std::uint32_t k = argc > 1 ? static_cast<std::uint32_t>(std::atoi(argv[1])) : 256;
  const std::size_t window_len = argc > 2 ? static_cast<std::size_t>(std::atoi(argv[2])) : 64;
  const std::size_t batch = argc > 3 ? static_cast<std::size_t>(std::atoi(argv[3])) : 32;
  const int reps = argc > 4 ? std::atoi(argv[4]) : 5;

  blm::ModelConfig config;
  config.vocab_size = k;
  config.embed_dim = 32;
  config.hidden_dim = 64;
  config.window_len = static_cast<std::uint32_t>(window_len);
  config.seed = 1;
  const auto params = blm::init_model(config);

  blm::SplitMix64 rng(2);
  std::vector<blm::TokenSequence> windows;
  for (std::size_t i = 0; i < batch; ++i) windows.push_back(random_window(rng, k, window_len));
  std::vector<blm::TokenSequence> traces;
  for (std::size_t i = 0; i < 2 * batch; ++i) {
    traces.push_back(random_window(rng, k, 16 * window_len));
  }

#ifdef _OPENMP
  std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled (serial build)\n");
#endif
  std::printf("model: K=%u d_e=%u d_h=%u window=%zu batch=%zu reps=%d\n", k, config.embed_dim,
              config.hidden_dim, window_len, batch, reps);

  // warm-up plus equivalence check
  auto serial_ref = blm::batch_loss_and_gradients_serial(params, windows);
  auto parallel_ref = blm::batch_loss_and_gradients_parallel(params, windows);
  const bool grads_match =
      serial_ref.loss == parallel_ref.loss && serial_ref.grads == parallel_ref.grads;

  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    auto result = blm::batch_loss_and_gradients_serial(params, windows);
    (void)result;
  }
  const double serial_ms = ms_since(t0) / reps;

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    auto result = blm::batch_loss_and_gradients_parallel(params, windows);
    (void)result;
  }
  const double parallel_ms = ms_since(t0) / reps;

  std::printf("batch gradients: serial %8.2f ms   parallel %8.2f ms   speedup %.2fx   %s\n",
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              grads_match ? "bit-identical" : "MISMATCH");

  auto scores_serial = blm::score_sequences_serial(params, traces);
  auto scores_parallel = blm::score_sequences_parallel(params, traces);
  const bool scores_match = scores_serial == scores_parallel;

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) blm::score_sequences_serial(params, traces);
  const double score_serial_ms = ms_since(t0) / reps;

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) blm::score_sequences_parallel(params, traces);
  const double score_parallel_ms = ms_since(t0) / reps;

  std::printf("trace scoring:   serial %8.2f ms   parallel %8.2f ms   speedup %.2fx   %s\n",
              score_serial_ms, score_parallel_ms, score_serial_ms / score_parallel_ms,
              scores_match ? "bit-identical" : "MISMATCH");

  return (grads_match && scores_match) ? 0 : 1;
}
