// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "branchlm/corpus.hpp"
#include "branchlm/detector.hpp"
#include "branchlm/model.hpp"
#include "branchlm/packet.hpp"
#include "branchlm/tracegen.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kBadInput = 2;
constexpr int kNumericFailure = 3;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::uint8_t> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_binary(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<blm::TraceSegment> load_traces(const std::vector<std::string>& paths) {
  std::vector<blm::TraceSegment> segments;
  for (const std::string& path : paths) {
    auto decoded = blm::decode_stream(read_binary(path));
    for (auto& segment : decoded) {
      segment.segment_index = segments.size();
      segments.push_back(std::move(segment));
    }
  }
  return segments;
}

blm::ModelParams load_model_checked(const std::string& model_path,
                                    const blm::Vocabulary& vocab) {
  blm::ModelParams params = blm::load_checkpoint(read_binary(model_path));
  if (params.vocab_size() != vocab.size()) {
    throw std::invalid_argument("model vocabulary size " + std::to_string(params.vocab_size()) +
                                " does not match vocabulary file size " +
                                std::to_string(vocab.size()));
  }
  return params;
}

struct GenArgs {
  std::string spec_path;
  std::string out_path;
  std::size_t traces = 0;
  std::size_t events = 0;
  std::uint64_t seed = 0;
  std::string attack;       // "", "noop", "splice"
  std::int64_t at = -1;     // -1: default to events / 2
  std::string attack_spec;  // foreign CFG for splice
  std::size_t attack_len = 200;
};

int run_gen(const GenArgs& args) {
  const auto spec = blm::parse_program_spec(read_text(args.spec_path));

  auto corpus = blm::gen_corpus(spec, args.traces, args.events, args.seed);
  std::string truth;
  if (!args.attack.empty()) {
    blm::AnomalySpec anomaly;
    if (args.attack == "splice") {
      if (args.attack_spec.empty()) {
        std::cerr << "--attack splice requires --attack-spec\n";
        return kUsageError;
      }
      anomaly.kind = blm::AnomalySpec::Kind::Splice;
      anomaly.foreign = blm::parse_program_spec(read_text(args.attack_spec));
      anomaly.splice_len = args.attack_len;
    } else {
      anomaly.kind = blm::AnomalySpec::Kind::NoopMimicry;
    }
    anomaly.insert_at = args.at >= 0 ? static_cast<std::size_t>(args.at) : args.events / 2;

    for (std::size_t i = 0; i < corpus.size(); ++i) {
      auto injected = blm::inject_anomaly(corpus[i], anomaly, args.seed + 1000003 + i);
      corpus[i] = std::move(injected.trace);
      corpus[i].segment_index = i;
      truth += "trace=" + std::to_string(i) + " start=" + std::to_string(injected.range_begin) +
               " end=" + std::to_string(injected.range_end) + "\n";
    }
  }

  write_binary(args.out_path, blm::encode_stream(corpus));
  if (!args.attack.empty()) {
    write_text(args.out_path + ".truth", truth);
  }
  return kOk;
}

int run_decode(const std::string& in_path, const std::string& out_path) {
  const std::string dump = blm::dump_events(blm::decode_stream(read_binary(in_path)));
  if (out_path.empty()) {
    std::cout << dump;
  } else {
    write_text(out_path, dump);
  }
  return kOk;
}

int run_vocab(const std::vector<std::string>& in_paths, std::uint32_t k,
              const std::string& out_path) {
  const auto segments = load_traces(in_paths);
  write_text(out_path, blm::build_vocabulary(segments, k).to_text());
  return kOk;
}

struct TrainArgs {
  std::vector<std::string> trace_paths;
  std::string vocab_path;
  std::string out_path;
  double val_split = 0.1;
  std::uint64_t seed = 0;
  std::uint32_t embed_dim = 32;
  std::uint32_t hidden_dim = 128;
  std::uint32_t window_len = 64;
  std::uint32_t stride = 0;  // 0: default to window_len
  double learning_rate = 0.1;
  std::uint32_t epochs = 10;
  double clip_norm = 5.0;
  std::uint32_t batch_size = 32;
  bool serial = false;
};

int run_train(const TrainArgs& args) {
  const auto vocab = blm::Vocabulary::from_text(read_text(args.vocab_path));

  blm::ModelConfig config;
  config.vocab_size = vocab.size();
  config.embed_dim = args.embed_dim;
  config.hidden_dim = args.hidden_dim;
  config.window_len = args.window_len;
  config.learning_rate = args.learning_rate;
  config.epochs = args.epochs;
  config.clip_norm = args.clip_norm;
  config.batch_size = args.batch_size;
  config.seed = args.seed;

  const std::uint32_t stride = args.stride == 0 ? args.window_len : args.stride;
  std::vector<blm::TokenSequence> windows;
  for (const auto& segment : load_traces(args.trace_paths)) {
    auto seq = blm::tokenize(segment, vocab);
    auto pieces = blm::window(seq, config.window_len, stride);
    windows.insert(windows.end(), std::make_move_iterator(pieces.begin()),
                   std::make_move_iterator(pieces.end()));
  }
  if (windows.empty()) {
    throw std::invalid_argument("no training windows: traces are shorter than the window length");
  }

  const auto data = blm::split(std::move(windows), args.val_split, args.seed);
  auto result = blm::train(blm::init_model(config), data, config, !args.serial);

  for (std::size_t epoch = 0; epoch < result.history.size(); ++epoch) {
    std::cout << "epoch=" << (epoch + 1) << " train=" << g17(result.history[epoch].train_loss)
              << " val=" << g17(result.history[epoch].validation_loss) << "\n";
  }
  write_binary(args.out_path, blm::save_checkpoint(result.params));
  return kOk;
}

struct ScoreArgs {
  std::string model_path;
  std::string vocab_path;
  std::string in_path;
  std::uint32_t window = 0;  // 0: sequence-level score only
  std::uint32_t stride = 0;  // 0: default to window
};

int run_score(const ScoreArgs& args) {
  const auto vocab = blm::Vocabulary::from_text(read_text(args.vocab_path));
  const auto params = load_model_checked(args.model_path, vocab);

  for (const auto& segment : load_traces({args.in_path})) {
    const auto report =
        blm::score_trace(params, blm::tokenize(segment, vocab), args.window, args.stride);
    std::cout << "avg_nll=" << g17(report.sequence_score) << " tokens=" << report.token_count
              << "\n";
    for (const auto& ws : report.window_scores) {
      std::cout << ws.start << "," << g17(ws.score) << "\n";
    }
  }
  return kOk;
}

struct EvalArgs {
  std::string model_path;
  std::string vocab_path;
  std::vector<std::string> normal_paths;
  std::vector<std::string> attack_paths;
  std::string out_path;
};

int run_eval(const EvalArgs& args) {
  const auto vocab = blm::Vocabulary::from_text(read_text(args.vocab_path));
  const auto params = load_model_checked(args.model_path, vocab);

  auto score_files = [&](const std::vector<std::string>& paths) {
    std::vector<blm::TokenSequence> seqs;
    for (const auto& segment : load_traces(paths)) {
      seqs.push_back(blm::tokenize(segment, vocab));
    }
    return blm::score_sequences_parallel(params, seqs);
  };
  const auto normal_scores = score_files(args.normal_paths);
  const auto attack_scores = score_files(args.attack_paths);

  const auto curve = blm::roc(normal_scores, attack_scores);
  std::string csv = "fpr,tpr,threshold\n";
  for (const auto& point : curve.points) {
    csv += g17(point.fpr) + "," + g17(point.tpr) + "," + g17(point.threshold) + "\n";
  }
  csv += "auc=" + g17(curve.auc) + "\n";
  write_text(args.out_path, csv);
  std::cout << "auc=" << g17(curve.auc) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"branch-trace language model toolkit"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate synthetic traces from a CFG spec");
  gen->add_option("--spec", gen_args.spec_path, "program spec file")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--out", gen_args.out_path, "output .spt file")->required();
  gen->add_option("--traces", gen_args.traces, "number of traces")->required();
  gen->add_option("--events", gen_args.events, "events per trace")->required();
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--attack", gen_args.attack, "inject an anomaly into every trace")
      ->check(CLI::IsMember({"noop", "splice"}));
  gen->add_option("--at", gen_args.at, "injection position (default: events/2)");
  gen->add_option("--attack-spec", gen_args.attack_spec, "foreign spec for splice attacks")
      ->check(CLI::ExistingFile);
  gen->add_option("--attack-len", gen_args.attack_len, "splice length (default 200)");

  std::string decode_in, decode_out;
  auto* decode = app.add_subcommand("decode", "Dump a .spt file as text events");
  decode->add_option("--in", decode_in, "input .spt file")->required()->check(CLI::ExistingFile);
  decode->add_option("--out", decode_out, "output text file (default: stdout)");

  std::vector<std::string> vocab_in;
  std::uint32_t vocab_k = 1024;
  std::string vocab_out;
  auto* vocab = app.add_subcommand("vocab", "Build a vocabulary from traces");
  vocab->add_option("--in", vocab_in, "input .spt files")->required()->check(CLI::ExistingFile);
  vocab->add_option("--k", vocab_k, "vocabulary size (default 1024)")
      ->check(CLI::PositiveNumber);
  vocab->add_option("--out", vocab_out, "output vocabulary file")->required();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train the branch model");
  train->add_option("--traces", train_args.trace_paths, "training .spt files")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--vocab", train_args.vocab_path, "vocabulary file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out", train_args.out_path, "output checkpoint (.blm)")->required();
  train->add_option("--val-split", train_args.val_split, "validation fraction (default 0.1)")
      ->check(CLI::Range(0.0, 0.999999));
  train->add_option("--seed", train_args.seed, "seed for init, shuffle and split");
  train->add_option("--embed-dim", train_args.embed_dim, "embedding dimension (default 32)");
  train->add_option("--hidden-dim", train_args.hidden_dim, "hidden dimension (default 128)");
  train->add_option("--window", train_args.window_len, "window length (default 64)");
  train->add_option("--stride", train_args.stride, "window stride (default: window length)");
  train->add_option("--lr", train_args.learning_rate, "learning rate (default 0.1)");
  train->add_option("--epochs", train_args.epochs, "epochs (default 10)");
  train->add_option("--clip-norm", train_args.clip_norm, "gradient clip norm (default 5)");
  train->add_option("--batch-size", train_args.batch_size, "batch size (default 32)");
  train->add_flag("--serial", train_args.serial, "disable OpenMP batch parallelism");

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Score traces by perplexity");
  score->add_option("--model", score_args.model_path, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--vocab", score_args.vocab_path, "vocabulary file")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--in", score_args.in_path, "input .spt file")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--window", score_args.window, "also emit windowed scores of this width");
  score->add_option("--stride", score_args.stride, "window stride (default: window width)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "ROC evaluation of normal vs attack traces");
  eval->add_option("--model", eval_args.model_path, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--vocab", eval_args.vocab_path, "vocabulary file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--normal", eval_args.normal_paths, "normal .spt files")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--attack", eval_args.attack_paths, "attack .spt files")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out", eval_args.out_path, "ROC CSV output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (gen->parsed()) return run_gen(gen_args);
    if (decode->parsed()) return run_decode(decode_in, decode_out);
    if (vocab->parsed()) return run_vocab(vocab_in, vocab_k, vocab_out);
    if (train->parsed()) return run_train(train_args);
    if (score->parsed()) return run_score(score_args);
    if (eval->parsed()) return run_eval(eval_args);
  } catch (const blm::NumericFailureError& e) {
    std::cerr << e.what() << "\n";
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kBadInput;
  }
  return kOk;
}
