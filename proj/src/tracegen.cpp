// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "branchlm/tracegen.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "branchlm/rng.hpp"

namespace blm {

namespace {

std::unordered_map<std::uint32_t, std::size_t> block_index(const ProgramSpec& spec) {
  std::unordered_map<std::uint32_t, std::size_t> index;
  index.reserve(spec.blocks.size());
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto [it, inserted] = index.emplace(spec.blocks[i].id, i);
    if (!inserted) {
      throw InvalidSpecError("duplicate block id " + std::to_string(spec.blocks[i].id));
    }
  }
  return index;
}

}  // namespace

void validate_spec(const ProgramSpec& spec) {
  if (spec.blocks.empty()) throw InvalidSpecError("no blocks");
  const auto index = block_index(spec);

  const auto entry_it = index.find(spec.entry);
  if (entry_it == index.end()) {
    throw InvalidSpecError("entry block " + std::to_string(spec.entry) + " does not exist");
  }
  if (spec.blocks[entry_it->second].edges.empty()) {
    throw InvalidSpecError("entry block " + std::to_string(spec.entry) +
                           " has no outgoing edges, the walk could never emit an event");
  }

  for (const CfgBlock& block : spec.blocks) {
    const std::string where = "block " + std::to_string(block.id);
    int taken = 0;
    int not_taken = 0;
    double sum = 0.0;
    for (const CfgEdge& edge : block.edges) {
      if (index.find(edge.to) == index.end()) {
        throw InvalidSpecError(where + " has an edge to missing block " + std::to_string(edge.to));
      }
      if (edge.probability < 0.0) {
        throw InvalidSpecError(where + " has a negative edge probability");
      }
      sum += edge.probability;
      if (edge.kind == EdgeKind::ConditionalTaken) ++taken;
      if (edge.kind == EdgeKind::ConditionalNotTaken) ++not_taken;
    }
    if (!block.edges.empty() && std::abs(sum - 1.0) > 1e-9) {
      throw InvalidSpecError(where + " edge probabilities sum to " + std::to_string(sum) +
                             ", expected 1");
    }
    if (!((taken == 0 && not_taken == 0) || (taken == 1 && not_taken == 1))) {
      throw InvalidSpecError(where + " conditional edges must form one taken/not-taken pair");
    }
  }
}

ProgramSpec parse_program_spec(const std::string& text) {
  ProgramSpec spec;
  bool entry_seen = false;
  std::vector<std::pair<std::uint32_t, CfgEdge>> pending_edges;
  std::vector<std::string> edge_origins;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string keyword;
    if (!(fields >> keyword)) continue;

    const std::string where = "line " + std::to_string(line_no);
    if (keyword == "block") {
      std::uint32_t id = 0;
      std::string addr_text;
      if (!(fields >> id >> addr_text)) {
        throw InvalidSpecError(where + ": expected `block <id> <hex_address>`");
      }
      std::uint64_t address = 0;
      try {
        std::size_t used = 0;
        address = std::stoull(addr_text, &used, 16);
        if (used != addr_text.size()) throw std::invalid_argument(addr_text);
      } catch (const std::exception&) {
        throw InvalidSpecError(where + ": bad address `" + addr_text + "`");
      }
      spec.blocks.push_back(CfgBlock{id, address, {}});
    } else if (keyword == "entry") {
      if (!(fields >> spec.entry)) {
        throw InvalidSpecError(where + ": expected `entry <id>`");
      }
      entry_seen = true;
    } else if (keyword == "edge") {
      std::uint32_t from = 0;
      CfgEdge edge;
      std::string kind;
      if (!(fields >> from >> edge.to >> edge.probability >> kind)) {
        throw InvalidSpecError(where + ": expected `edge <from> <to> <prob> <kind>`");
      }
      if (kind == "taken") {
        edge.kind = EdgeKind::ConditionalTaken;
      } else if (kind == "nottaken") {
        edge.kind = EdgeKind::ConditionalNotTaken;
      } else if (kind == "indirect") {
        edge.kind = EdgeKind::Indirect;
      } else {
        throw InvalidSpecError(where + ": unknown edge kind `" + kind + "`");
      }
      pending_edges.emplace_back(from, edge);
      edge_origins.push_back(where);
    } else {
      throw InvalidSpecError(where + ": unknown keyword `" + keyword + "`");
    }
  }
  if (!entry_seen) throw InvalidSpecError("no entry block declared");

  // Attach edges after all blocks are known; declaration order is free.
  for (std::size_t i = 0; i < pending_edges.size(); ++i) {
    const auto& [from, edge] = pending_edges[i];
    bool found = false;
    for (CfgBlock& block : spec.blocks) {
      if (block.id == from) {
        block.edges.push_back(edge);
        found = true;
        break;
      }
    }
    if (!found) {
      throw InvalidSpecError(edge_origins[i] + ": edge from undeclared block " +
                             std::to_string(from));
    }
  }
  validate_spec(spec);
  return spec;
}

TraceSegment emit_trace(const ProgramSpec& spec, std::size_t n_events, std::uint64_t seed) {
  validate_spec(spec);
  const auto index = block_index(spec);

  SplitMix64 rng(seed);
  TraceSegment segment;
  segment.events.reserve(n_events);

  std::size_t at = index.at(spec.entry);
  while (segment.events.size() < n_events) {
    const CfgBlock& block = spec.blocks[at];
    if (block.edges.empty()) {
      at = index.at(spec.entry);
      continue;
    }
    const double u = rng.next_double();
    double cumulative = 0.0;
    const CfgEdge* chosen = &block.edges.back();
    for (const CfgEdge& edge : block.edges) {
      cumulative += edge.probability;
      if (u < cumulative) {
        chosen = &edge;
        break;
      }
    }
    const std::size_t next = index.at(chosen->to);
    switch (chosen->kind) {
      case EdgeKind::ConditionalTaken:
        segment.events.push_back(BranchEvent::direction(true));
        break;
      case EdgeKind::ConditionalNotTaken:
        segment.events.push_back(BranchEvent::direction(false));
        break;
      case EdgeKind::Indirect:
        segment.events.push_back(BranchEvent::target(spec.blocks[next].address));
        break;
    }
    at = next;
  }
  return segment;
}

std::vector<TraceSegment> gen_corpus(const ProgramSpec& spec, std::size_t n_traces,
                                     std::size_t events_per_trace, std::uint64_t seed) {
  validate_spec(spec);
  std::vector<TraceSegment> corpus;
  corpus.reserve(n_traces);
  for (std::size_t i = 0; i < n_traces; ++i) {
    TraceSegment segment = emit_trace(spec, events_per_trace, seed + i);
    segment.segment_index = i;
    corpus.push_back(std::move(segment));
  }
  return corpus;
}

namespace {

// Internal CFGs for the system-call scenario. The three address ranges
// are deliberately far apart so the two tails (and the prefix) never
// share a target address.

ProgramSpec scenario_prefix_spec() {
  ProgramSpec spec;
  spec.entry = 0;
  spec.blocks = {
      {0, 0x00401000, {{1, 0.6, EdgeKind::ConditionalTaken}, {2, 0.4, EdgeKind::ConditionalNotTaken}}},
      {1, 0x00401040, {{3, 1.0, EdgeKind::Indirect}}},
      {2, 0x00401080, {{3, 1.0, EdgeKind::Indirect}}},
      {3, 0x004010c0, {{0, 0.5, EdgeKind::ConditionalTaken}, {4, 0.5, EdgeKind::ConditionalNotTaken}}},
      {4, 0x00401100, {{0, 1.0, EdgeKind::Indirect}}},
  };
  return spec;
}

ProgramSpec scenario_file_spec() {
  ProgramSpec spec;
  spec.entry = 0;
  spec.blocks = {
      {0, 0x00501000, {{1, 0.7, EdgeKind::ConditionalTaken}, {2, 0.3, EdgeKind::ConditionalNotTaken}}},
      {1, 0x00501040, {{3, 0.5, EdgeKind::Indirect}, {4, 0.5, EdgeKind::Indirect}}},
      {2, 0x00501080, {{4, 1.0, EdgeKind::Indirect}}},
      {3, 0x005010c0, {{5, 0.8, EdgeKind::ConditionalTaken}, {0, 0.2, EdgeKind::ConditionalNotTaken}}},
      {4, 0x00501100, {{5, 1.0, EdgeKind::Indirect}}},
      {5, 0x00501140, {{0, 1.0, EdgeKind::Indirect}}},
  };
  return spec;
}

ProgramSpec scenario_error_spec() {
  ProgramSpec spec;
  spec.entry = 0;
  spec.blocks = {
      {0, 0x00601000, {{1, 0.5, EdgeKind::ConditionalTaken}, {2, 0.5, EdgeKind::ConditionalNotTaken}}},
      {1, 0x00601040, {{3, 1.0, EdgeKind::Indirect}}},
      {2, 0x00601080, {{3, 1.0, EdgeKind::Indirect}}},
      {3, 0x006010c0, {{4, 0.9, EdgeKind::ConditionalTaken}, {0, 0.1, EdgeKind::ConditionalNotTaken}}},
      {4, 0x00601100, {{0, 1.0, EdgeKind::Indirect}}},
  };
  return spec;
}

std::vector<BranchEvent> noop_tail_events(const ScenarioConfig& config) {
  if (config.noop_tail_len < 1) {
    throw std::invalid_argument("scenario tail lengths must be >= 1");
  }
  std::vector<BranchEvent> events;
  events.reserve(1 + config.noop_tail_len);
  events.push_back(BranchEvent::direction(false));  // the diverging 23rd event
  TraceSegment tail = emit_trace(scenario_error_spec(), config.noop_tail_len, config.seed + 2);
  events.insert(events.end(), tail.events.begin(), tail.events.end());
  return events;
}

}  // namespace

SyscallScenario make_syscall_scenario(const ScenarioConfig& config) {
  if (config.normal_tail_len < 1 || config.noop_tail_len < 1) {
    throw std::invalid_argument("scenario tail lengths must be >= 1");
  }

  TraceSegment prefix = emit_trace(scenario_prefix_spec(), config.shared_prefix_len, config.seed);

  SyscallScenario scenario;
  scenario.normal.events = prefix.events;
  scenario.normal.events.push_back(BranchEvent::direction(true));
  TraceSegment normal_tail =
      emit_trace(scenario_file_spec(), config.normal_tail_len, config.seed + 1);
  scenario.normal.events.insert(scenario.normal.events.end(), normal_tail.events.begin(),
                                normal_tail.events.end());

  scenario.noop.events = prefix.events;
  const std::vector<BranchEvent> noop_tail = noop_tail_events(config);
  scenario.noop.events.insert(scenario.noop.events.end(), noop_tail.begin(), noop_tail.end());
  return scenario;
}

InjectedTrace inject_anomaly(const TraceSegment& base, const AnomalySpec& spec,
                             std::uint64_t seed) {
  if (spec.insert_at > base.events.size()) {
    throw OutOfRangeError("insert position " + std::to_string(spec.insert_at) +
                          " exceeds base trace length " + std::to_string(base.events.size()));
  }

  std::vector<BranchEvent> inserted;
  if (spec.kind == AnomalySpec::Kind::NoopMimicry) {
    ScenarioConfig config = spec.scenario;
    config.seed = seed;
    inserted = noop_tail_events(config);
  } else {
    if (!spec.foreign.has_value()) {
      throw InvalidSpecError("splice anomaly needs a foreign program spec");
    }
    if (spec.splice_len < 1) {
      throw std::invalid_argument("splice length must be >= 1");
    }
    inserted = emit_trace(*spec.foreign, spec.splice_len, seed).events;
  }

  InjectedTrace result;
  result.trace.segment_index = base.segment_index;
  result.trace.events.reserve(base.events.size() + inserted.size());
  result.trace.events.assign(base.events.begin(),
                             base.events.begin() + static_cast<std::ptrdiff_t>(spec.insert_at));
  result.trace.events.insert(result.trace.events.end(), inserted.begin(), inserted.end());
  result.trace.events.insert(result.trace.events.end(),
                             base.events.begin() + static_cast<std::ptrdiff_t>(spec.insert_at),
                             base.events.end());
  result.range_begin = spec.insert_at;
  result.range_end = spec.insert_at + inserted.size();
  return result;
}

}  // namespace blm
