// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <string>

#include "branchlm/tracegen.hpp"

using namespace blm;

namespace {

ProgramSpec two_block_cycle() {
  ProgramSpec spec;
  spec.entry = 0;
  spec.blocks = {
      {0, 0xa000, {{1, 1.0, EdgeKind::Indirect}}},
      {1, 0xb000, {{0, 1.0, EdgeKind::Indirect}}},
  };
  return spec;
}

std::set<std::uint64_t> target_addresses(const std::vector<BranchEvent>& events) {
  std::set<std::uint64_t> addresses;
  for (const BranchEvent& e : events) {
    if (e.kind == BranchEvent::Kind::Target) addresses.insert(e.address);
  }
  return addresses;
}

}  // namespace

TEST_CASE("validate_spec names the offending block") {
  ProgramSpec bad = two_block_cycle();
  bad.blocks[1].edges[0].probability = 0.8;
  try {
    validate_spec(bad);
    FAIL("expected InvalidSpecError");
  } catch (const InvalidSpecError& e) {
    CHECK(std::string(e.what()).find("block 1") != std::string::npos);
  }

  SUBCASE("missing successor") {
    ProgramSpec spec = two_block_cycle();
    spec.blocks[0].edges[0].to = 9;
    CHECK_THROWS_AS(validate_spec(spec), InvalidSpecError);
  }
  SUBCASE("missing entry") {
    ProgramSpec spec = two_block_cycle();
    spec.entry = 5;
    CHECK_THROWS_AS(validate_spec(spec), InvalidSpecError);
  }
  SUBCASE("entry without edges can never emit") {
    ProgramSpec spec = two_block_cycle();
    spec.blocks[0].edges.clear();
    spec.blocks[1].edges[0].to = 1;
    CHECK_THROWS_AS(validate_spec(spec), InvalidSpecError);
  }
  SUBCASE("unpaired conditional edge") {
    ProgramSpec spec = two_block_cycle();
    spec.blocks[0].edges[0].kind = EdgeKind::ConditionalTaken;
    CHECK_THROWS_AS(validate_spec(spec), InvalidSpecError);
  }
  SUBCASE("duplicate block id") {
    ProgramSpec spec = two_block_cycle();
    spec.blocks.push_back(spec.blocks[0]);
    CHECK_THROWS_AS(validate_spec(spec), InvalidSpecError);
  }
}

TEST_CASE("emit_trace walks deterministically") {
  auto segment = emit_trace(two_block_cycle(), 4, 7);
  CHECK(segment.events == std::vector<BranchEvent>{
                              BranchEvent::target(0xb000), BranchEvent::target(0xa000),
                              BranchEvent::target(0xb000), BranchEvent::target(0xa000)});

  CHECK(emit_trace(two_block_cycle(), 4, 7) == segment);
  CHECK(emit_trace(two_block_cycle(), 4, 8) == segment);  // walk has no choices

  SUBCASE("degenerate conditional probability emits a constant stream") {
    ProgramSpec spec;
    spec.entry = 0;
    spec.blocks = {
        {0, 0xc000, {{0, 1.0, EdgeKind::ConditionalTaken}, {1, 0.0, EdgeKind::ConditionalNotTaken}}},
        {1, 0xd000, {{0, 1.0, EdgeKind::Indirect}}},
    };
    auto events = emit_trace(spec, 50, 3).events;
    for (const BranchEvent& e : events) {
      CHECK(e == BranchEvent::direction(true));
    }
  }

  SUBCASE("dead-end blocks restart at the entry without emitting") {
    ProgramSpec spec;
    spec.entry = 0;
    spec.blocks = {
        {0, 0xe000, {{1, 1.0, EdgeKind::Indirect}}},
        {1, 0xf000, {}},
    };
    auto events = emit_trace(spec, 3, 1).events;
    CHECK(events == std::vector<BranchEvent>(3, BranchEvent::target(0xf000)));
  }
}

TEST_CASE("edge frequencies track their probabilities") {
  ProgramSpec spec;
  spec.entry = 0;
  spec.blocks = {
      {0, 0x1000, {{1, 0.9, EdgeKind::Indirect}, {2, 0.1, EdgeKind::Indirect}}},
      {1, 0x2000, {{0, 1.0, EdgeKind::Indirect}}},
      {2, 0x3000, {{0, 1.0, EdgeKind::Indirect}}},
  };
  // Events alternate: choice from block 0, then the return hop.
  auto events = emit_trace(spec, 200000, 12345).events;
  std::size_t first = 0;
  std::size_t decisions = 0;
  for (std::size_t i = 0; i < events.size(); i += 2) {
    ++decisions;
    if (events[i].address == 0x2000) ++first;
  }
  const double freq = static_cast<double>(first) / static_cast<double>(decisions);
  CHECK(freq > 0.89);
  CHECK(freq < 0.91);
}

TEST_CASE("gen_corpus derives per-trace seeds") {
  ProgramSpec spec;
  spec.entry = 0;
  spec.blocks = {
      {0, 0x1000, {{1, 0.5, EdgeKind::Indirect}, {2, 0.5, EdgeKind::Indirect}}},
      {1, 0x2000, {{0, 1.0, EdgeKind::Indirect}}},
      {2, 0x3000, {{0, 1.0, EdgeKind::Indirect}}},
  };
  auto corpus = gen_corpus(spec, 3, 64, 500);
  REQUIRE(corpus.size() == 3);
  CHECK(corpus[0].segment_index == 0);
  CHECK(corpus[2].segment_index == 2);
  CHECK(corpus[0].events != corpus[1].events);
  CHECK(corpus[1].events != corpus[2].events);
  CHECK(gen_corpus(spec, 3, 64, 500) == corpus);
  CHECK(gen_corpus(spec, 0, 64, 500).empty());

  SUBCASE("serialized corpus holds one BOUNDARY per trace") {
    auto encoded = encode_stream(corpus);
    std::size_t boundaries = 0;
    std::size_t offset = 0;
    while (offset < encoded.size()) {
      auto decoded = decode_packet(encoded, offset);
      if (std::holds_alternative<BoundaryPacket>(decoded.packet)) ++boundaries;
      offset = decoded.next_offset;
    }
    CHECK(boundaries == 3);
    CHECK(decode_stream(encoded) == corpus);
  }
}

TEST_CASE("syscall scenario mirrors the divergence structure") {
  auto scenario = make_syscall_scenario();
  CHECK(scenario.normal.events.size() == 387);  // 22 + 1 + 364
  CHECK(scenario.noop.events.size() == 182);    // 22 + 1 + 159

  std::size_t first_diff = 0;
  while (first_diff < scenario.noop.events.size() &&
         scenario.normal.events[first_diff] == scenario.noop.events[first_diff]) {
    ++first_diff;
  }
  CHECK(first_diff == 22);

  const auto normal_tail = target_addresses(std::vector<BranchEvent>(
      scenario.normal.events.begin() + 23, scenario.normal.events.end()));
  const auto noop_tail = target_addresses(std::vector<BranchEvent>(
      scenario.noop.events.begin() + 23, scenario.noop.events.end()));
  CHECK(!normal_tail.empty());
  CHECK(!noop_tail.empty());
  for (std::uint64_t address : noop_tail) {
    CHECK(normal_tail.find(address) == normal_tail.end());
  }

  SUBCASE("overridden lengths are honored") {
    ScenarioConfig config;
    config.shared_prefix_len = 5;
    config.normal_tail_len = 11;
    config.noop_tail_len = 3;
    auto small = make_syscall_scenario(config);
    CHECK(small.normal.events.size() == 17);
    CHECK(small.noop.events.size() == 9);
  }
}

TEST_CASE("inject_anomaly reports the ground-truth range") {
  auto base = emit_trace(two_block_cycle(), 40, 9);

  AnomalySpec spec;
  spec.kind = AnomalySpec::Kind::NoopMimicry;
  spec.insert_at = 40;
  auto injected = inject_anomaly(base, spec, 11);
  CHECK(injected.range_begin == 40);
  CHECK(injected.range_end == 40 + 1 + spec.scenario.noop_tail_len);
  CHECK(injected.trace.events.size() == injected.range_end);
  CHECK(std::vector<BranchEvent>(injected.trace.events.begin(),
                                 injected.trace.events.begin() + 40) == base.events);

  SUBCASE("mid-trace insertion keeps both base parts") {
    spec.insert_at = 10;
    auto mid = inject_anomaly(base, spec, 11);
    CHECK(mid.range_begin == 10);
    CHECK(mid.range_end == 170);
    CHECK(mid.trace.events.size() == base.events.size() + 160);
    CHECK(std::vector<BranchEvent>(mid.trace.events.begin(), mid.trace.events.begin() + 10) ==
          std::vector<BranchEvent>(base.events.begin(), base.events.begin() + 10));
    CHECK(std::vector<BranchEvent>(mid.trace.events.begin() + 170, mid.trace.events.end()) ==
          std::vector<BranchEvent>(base.events.begin() + 10, base.events.end()));
  }

  SUBCASE("insertion past the end is out of range") {
    spec.insert_at = 41;
    CHECK_THROWS_AS(inject_anomaly(base, spec, 11), OutOfRangeError);
  }

  SUBCASE("splice draws from the foreign spec") {
    ProgramSpec foreign;
    foreign.entry = 0;
    foreign.blocks = {{0, 0xdead00, {{0, 1.0, EdgeKind::Indirect}}}};

    AnomalySpec splice;
    splice.kind = AnomalySpec::Kind::Splice;
    splice.insert_at = 5;
    splice.foreign = foreign;
    splice.splice_len = 12;
    auto injected_splice = inject_anomaly(base, splice, 3);
    CHECK(injected_splice.range_end - injected_splice.range_begin == 12);
    for (std::size_t i = injected_splice.range_begin; i < injected_splice.range_end; ++i) {
      CHECK(injected_splice.trace.events[i] == BranchEvent::target(0xdead00));
    }

    splice.splice_len = 0;
    CHECK_THROWS_AS(inject_anomaly(base, splice, 3), std::invalid_argument);
    splice.splice_len = 12;
    splice.foreign.reset();
    CHECK_THROWS_AS(inject_anomaly(base, splice, 3), InvalidSpecError);
  }

  SUBCASE("injected traces survive the packet codec") {
    spec.insert_at = 20;
    auto mid = inject_anomaly(base, spec, 13);
    mid.trace.segment_index = 0;
    CHECK(decode_stream(encode_stream({mid.trace})) == std::vector<TraceSegment>{mid.trace});
  }
}

TEST_CASE("program spec text parsing") {
  const std::string text =
      "# toy program\n"
      "block 0 0x1000\n"
      "block 1 0x2000\n"
      "block 2 0x3000\n"
      "entry 0\n"
      "edge 0 1 0.5 taken   # conditional pair\n"
      "edge 0 2 0.5 nottaken\n"
      "edge 1 0 1.0 indirect\n"
      "edge 2 0 1.0 indirect\n";
  auto spec = parse_program_spec(text);
  CHECK(spec.blocks.size() == 3);
  CHECK(spec.entry == 0);
  CHECK(spec.blocks[0].edges.size() == 2);
  CHECK(spec.blocks[0].edges[0].kind == EdgeKind::ConditionalTaken);
  CHECK(spec.blocks[1].address == 0x2000);

  auto segment = emit_trace(spec, 10, 1);
  CHECK(segment.events.size() == 10);

  CHECK_THROWS_AS(parse_program_spec("block 0 0x10\nedge 0 0 1.0 indirect\n"),
                  InvalidSpecError);  // no entry
  CHECK_THROWS_AS(parse_program_spec("entry 0\nblock 0 zzzz\n"), InvalidSpecError);
  CHECK_THROWS_AS(parse_program_spec("entry 0\nblock 0 0x10\nedge 0 0 1.0 sideways\n"),
                  InvalidSpecError);
  CHECK_THROWS_AS(parse_program_spec("entry 0\nblock 0 0x10\nedge 1 0 1.0 indirect\n"),
                  InvalidSpecError);  // edge from undeclared block
  CHECK_THROWS_AS(parse_program_spec("wat\n"), InvalidSpecError);

  SUBCASE("declaration order is free") {
    auto forward = parse_program_spec(
        "edge 0 1 1.0 indirect\n"
        "entry 0\n"
        "block 1 0x20\n"
        "block 0 0x10\n"
        "edge 1 0 1.0 indirect\n");
    CHECK(forward.blocks.size() == 2);
    CHECK(emit_trace(forward, 2, 0).events.size() == 2);
  }

  try {
    parse_program_spec(
        "entry 0\nblock 0 0x10\nblock 1 0x20\n"
        "edge 0 1 0.4 indirect\nedge 1 0 1.0 indirect\n");
    FAIL("expected InvalidSpecError");
  } catch (const InvalidSpecError& e) {
    CHECK(std::string(e.what()).find("block 0") != std::string::npos);
  }
}
