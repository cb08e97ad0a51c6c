// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "branchlm/model.hpp"
#include "branchlm/packet.hpp"

namespace fs = std::filesystem;

namespace {

// BRANCHLM_CLI is injected by CMake as the built binary's path.
const std::string kCli = BRANCHLM_CLI;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out_path = fs::path("cli_scratch") / ("stdout" + std::to_string(counter));
  const fs::path err_path = fs::path("cli_scratch") / ("stderr" + std::to_string(counter));
  ++counter;
  const std::string command =
      kCli + " " + args + " >" + out_path.string() + " 2>" + err_path.string();
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

const char* kSpecText =
    "# toy program\n"
    "block 0 0x1000\n"
    "block 1 0x1040\n"
    "block 2 0x1080\n"
    "block 3 0x10c0\n"
    "entry 0\n"
    "edge 0 1 0.6 taken\n"
    "edge 0 2 0.4 nottaken\n"
    "edge 1 3 1.0 indirect\n"
    "edge 2 3 1.0 indirect\n"
    "edge 3 0 0.5 indirect\n"
    "edge 3 1 0.5 indirect\n";

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

struct Scratch {
  Scratch() {
    fs::remove_all("cli_scratch");
    fs::create_directories("cli_scratch");
    write_file("cli_scratch/prog.spec", kSpecText);
  }
  fs::path dir{"cli_scratch"};
};

}  // namespace

TEST_CASE("gen, vocab, train, score, eval round the full pipeline") {
  Scratch scratch;

  auto gen = run("gen --spec cli_scratch/prog.spec --out cli_scratch/train.spt "
                 "--traces 6 --events 400 --seed 3");
  REQUIRE(gen.exit_code == 0);
  auto segments = blm::decode_stream([&] {
    std::ifstream in("cli_scratch/train.spt", std::ios::binary);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
  }());
  CHECK(segments.size() == 6);
  CHECK(segments[0].events.size() == 400);

  SUBCASE("gen is deterministic given the seed") {
    auto again = run("gen --spec cli_scratch/prog.spec --out cli_scratch/train2.spt "
                     "--traces 6 --events 400 --seed 3");
    REQUIRE(again.exit_code == 0);
    CHECK(slurp("cli_scratch/train.spt") == slurp("cli_scratch/train2.spt"));
  }

  auto vocab = run("vocab --in cli_scratch/train.spt --k 32 --out cli_scratch/prog.vocab");
  REQUIRE(vocab.exit_code == 0);
  const std::string vocab_text = slurp("cli_scratch/prog.vocab");
  CHECK(vocab_text.starts_with("UNK\n"));

  auto train = run("train --traces cli_scratch/train.spt --vocab cli_scratch/prog.vocab "
                   "--out cli_scratch/model.blm --window 12 --epochs 2 --embed-dim 6 "
                   "--hidden-dim 10 --seed 4");
  REQUIRE(train.exit_code == 0);
  CHECK(train.out.find("epoch=1 train=") != std::string::npos);
  CHECK(train.out.find("epoch=2 train=") != std::string::npos);
  CHECK(train.out.find(" val=") != std::string::npos);

  SUBCASE("checkpoint on disk parses and matches the vocabulary") {
    std::ifstream in("cli_scratch/model.blm", std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    auto params = blm::load_checkpoint(bytes);
    CHECK(params.hidden_dim() == 10);
  }

  auto gen_test = run("gen --spec cli_scratch/prog.spec --out cli_scratch/test.spt "
                      "--traces 2 --events 300 --seed 9");
  REQUIRE(gen_test.exit_code == 0);

  auto score = run("score --model cli_scratch/model.blm --vocab cli_scratch/prog.vocab "
                   "--in cli_scratch/test.spt");
  REQUIRE(score.exit_code == 0);
  CHECK(score.out.find("avg_nll=") != std::string::npos);
  CHECK(score.out.find("tokens=300") != std::string::npos);

  SUBCASE("windowed scores add start,score rows") {
    auto windowed = run("score --model cli_scratch/model.blm --vocab cli_scratch/prog.vocab "
                        "--in cli_scratch/test.spt --window 32 --stride 32");
    REQUIRE(windowed.exit_code == 0);
    CHECK(windowed.out.find("\n0,") != std::string::npos);
    CHECK(windowed.out.find("\n32,") != std::string::npos);
  }

  auto gen_attack = run("gen --spec cli_scratch/prog.spec --out cli_scratch/attack.spt "
                        "--traces 2 --events 300 --seed 10 --attack noop --at 50");
  REQUIRE(gen_attack.exit_code == 0);
  const std::string truth = slurp("cli_scratch/attack.spt.truth");
  CHECK(truth.find("trace=0 start=50 end=210") != std::string::npos);
  CHECK(truth.find("trace=1 start=50 end=210") != std::string::npos);

  auto eval = run("eval --model cli_scratch/model.blm --vocab cli_scratch/prog.vocab "
                  "--normal cli_scratch/test.spt --attack cli_scratch/attack.spt "
                  "--out cli_scratch/roc.csv");
  REQUIRE(eval.exit_code == 0);
  CHECK(eval.out.find("auc=") == 0);
  const std::string csv = slurp("cli_scratch/roc.csv");
  CHECK(csv.starts_with("fpr,tpr,threshold\n0,0,inf\n"));
  CHECK(csv.find(",-inf\n") != std::string::npos);
  CHECK(csv.find("\nauc=") != std::string::npos);
  // the injected error-path addresses are out-of-vocabulary, so the two
  // attack traces must separate perfectly from the two normal ones
  CHECK(eval.out == "auc=1\n");

  SUBCASE("eval output is byte-stable across reruns") {
    auto again = run("eval --model cli_scratch/model.blm --vocab cli_scratch/prog.vocab "
                     "--normal cli_scratch/test.spt --attack cli_scratch/attack.spt "
                     "--out cli_scratch/roc2.csv");
    REQUIRE(again.exit_code == 0);
    CHECK(slurp("cli_scratch/roc2.csv") == csv);
  }
}

TEST_CASE("usage errors exit 1") {
  Scratch scratch;
  CHECK(run("gen --out cli_scratch/x.spt --traces 1 --events 10").exit_code == 1);
  CHECK(run("frobnicate").exit_code == 1);
  CHECK(run("decode").exit_code == 1);
  CHECK(run("gen --spec cli_scratch/missing.spec --out cli_scratch/x.spt --traces 1 "
            "--events 10").exit_code == 1);

  auto splice = run("gen --spec cli_scratch/prog.spec --out cli_scratch/x.spt --traces 1 "
                    "--events 10 --attack splice");
  CHECK(splice.exit_code == 1);
  CHECK(splice.err.find("--attack-spec") != std::string::npos);
}

TEST_CASE("malformed inputs exit 2") {
  Scratch scratch;

  write_file("cli_scratch/bad.spec",
             "block 0 0x1000\nblock 1 0x2000\nentry 0\n"
             "edge 0 1 0.8 indirect\nedge 1 0 1.0 indirect\n");
  auto bad_spec = run("gen --spec cli_scratch/bad.spec --out cli_scratch/x.spt "
                      "--traces 1 --events 10");
  CHECK(bad_spec.exit_code == 2);
  CHECK(bad_spec.err.find("block 0") != std::string::npos);

  write_file("cli_scratch/bad.spt", std::string("\x07\x01", 2));
  auto bad_decode = run("decode --in cli_scratch/bad.spt");
  CHECK(bad_decode.exit_code == 2);
  CHECK(bad_decode.err.find("offset 0") != std::string::npos);

  // vocabulary whose line count disagrees with the trained model's K
  auto gen = run("gen --spec cli_scratch/prog.spec --out cli_scratch/t.spt "
                 "--traces 2 --events 200 --seed 1");
  REQUIRE(gen.exit_code == 0);
  REQUIRE(run("vocab --in cli_scratch/t.spt --k 32 --out cli_scratch/v.vocab").exit_code == 0);
  REQUIRE(run("train --traces cli_scratch/t.spt --vocab cli_scratch/v.vocab "
              "--out cli_scratch/m.blm --window 8 --epochs 1 --embed-dim 4 --hidden-dim 6")
              .exit_code == 0);
  write_file("cli_scratch/small.vocab", "UNK\nT\nN\n");
  auto mismatch = run("score --model cli_scratch/m.blm --vocab cli_scratch/small.vocab "
                      "--in cli_scratch/t.spt");
  CHECK(mismatch.exit_code == 2);
  CHECK(mismatch.err.find("does not match") != std::string::npos);

  write_file("cli_scratch/garbage.blm", "XXXXnot a checkpoint");
  auto bad_model = run("score --model cli_scratch/garbage.blm --vocab cli_scratch/v.vocab "
                       "--in cli_scratch/t.spt");
  CHECK(bad_model.exit_code == 2);
}

TEST_CASE("a diverging training run exits 3") {
  Scratch scratch;
  REQUIRE(run("gen --spec cli_scratch/prog.spec --out cli_scratch/t.spt "
              "--traces 2 --events 200 --seed 1").exit_code == 0);
  REQUIRE(run("vocab --in cli_scratch/t.spt --k 16 --out cli_scratch/v.vocab").exit_code == 0);
  auto diverged = run("train --traces cli_scratch/t.spt --vocab cli_scratch/v.vocab "
                      "--out cli_scratch/m.blm --window 8 --epochs 4 --embed-dim 4 "
                      "--hidden-dim 6 --lr 1e300");
  CHECK(diverged.exit_code == 3);
  CHECK(diverged.err.find("numeric failure") != std::string::npos);
}

TEST_CASE("train writes bit-identical checkpoints across reruns") {
  Scratch scratch;
  REQUIRE(run("gen --spec cli_scratch/prog.spec --out cli_scratch/t.spt "
              "--traces 3 --events 300 --seed 5").exit_code == 0);
  REQUIRE(run("vocab --in cli_scratch/t.spt --k 16 --out cli_scratch/v.vocab").exit_code == 0);
  const std::string train_cmd =
      "train --traces cli_scratch/t.spt --vocab cli_scratch/v.vocab --window 10 "
      "--epochs 2 --embed-dim 4 --hidden-dim 8 --seed 11 --out cli_scratch/";
  auto first = run(train_cmd + "a.blm");
  auto second = run(train_cmd + "b.blm");
  REQUIRE(first.exit_code == 0);
  REQUIRE(second.exit_code == 0);
  CHECK(first.out == second.out);
  CHECK(slurp("cli_scratch/a.blm") == slurp("cli_scratch/b.blm"));
  CHECK(!slurp("cli_scratch/a.blm").empty());
}

TEST_CASE("decode dumps events and separators") {
  Scratch scratch;
  std::vector<blm::TraceSegment> segments{
      {0, {blm::BranchEvent::direction(true), blm::BranchEvent::target(0xbeef)}},
      {1, {blm::BranchEvent::direction(false)}},
  };
  const auto bytes = blm::encode_stream(segments);
  std::ofstream out("cli_scratch/two.spt", std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();

  auto decode = run("decode --in cli_scratch/two.spt");
  REQUIRE(decode.exit_code == 0);
  CHECK(decode.out == "T\n0x000000000000beef\n--\nN\n");
}
