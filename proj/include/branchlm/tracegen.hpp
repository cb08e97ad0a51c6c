// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BRANCHLM_TRACEGEN_HPP
#define BRANCHLM_TRACEGEN_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "branchlm/packet.hpp"

namespace blm {

enum class EdgeKind : std::uint8_t { ConditionalTaken, ConditionalNotTaken, Indirect };

struct CfgEdge {
  std::uint32_t to = 0;
  double probability = 0.0;
  EdgeKind kind = EdgeKind::Indirect;
};

struct CfgBlock {
  std::uint32_t id = 0;
  std::uint64_t address = 0;
  std::vector<CfgEdge> edges;
};

/// Control-flow-graph spec a synthetic program trace is walked from.
/// Per block, outgoing probabilities sum to 1 (within 1e-9) and
/// conditional edges come as a complementary taken/not-taken pair or not
/// at all. Blocks with no outgoing edges restart the walk at the entry.
struct ProgramSpec {
  std::vector<CfgBlock> blocks;
  std::uint32_t entry = 0;
};

class InvalidSpecError : public std::runtime_error {
 public:
  explicit InvalidSpecError(const std::string& what)
      : std::runtime_error("invalid program spec: " + what) {}
};

class OutOfRangeError : public std::runtime_error {
 public:
  explicit OutOfRangeError(const std::string& what) : std::runtime_error(what) {}
};

/// Throws InvalidSpecError (naming the offending block) unless every
/// invariant holds. All generators call this first.
void validate_spec(const ProgramSpec& spec);

/// Line-oriented text form:
///   block <id> <hex_address>
///   entry <id>
///   edge <from> <to> <prob> <taken|nottaken|indirect>
/// `#` starts a comment; blank lines are skipped.
ProgramSpec parse_program_spec(const std::string& text);

/// Seeded random walk from the entry block. Traversing a conditional
/// edge emits a Direction event, an indirect edge emits a Target event
/// carrying the successor block's address; the walk stops after exactly
/// n_events events.
TraceSegment emit_trace(const ProgramSpec& spec, std::size_t n_events, std::uint64_t seed);

/// n_traces independent emit_trace calls with derived seeds
/// (seed + trace index); segment_index = trace index.
std::vector<TraceSegment> gen_corpus(const ProgramSpec& spec, std::size_t n_traces,
                                     std::size_t events_per_trace, std::uint64_t seed);

/// Knobs of the system-call scenario. The defaults mirror the shape of a
/// traced open() call: a 22-event shared prefix, divergence at the 23rd
/// event, then a 364-event file-handling tail for the normal variant and
/// a 159-event error-handling tail for the no-op variant, with disjoint
/// tail address sets.
struct ScenarioConfig {
  std::size_t shared_prefix_len = 22;
  std::size_t normal_tail_len = 364;
  std::size_t noop_tail_len = 159;
  std::uint64_t seed = 20260101;
};

struct SyscallScenario {
  TraceSegment normal;  // prefix + divergence event + normal tail
  TraceSegment noop;    // prefix + divergence event + no-op tail
};

SyscallScenario make_syscall_scenario(const ScenarioConfig& config = {});

struct AnomalySpec {
  enum class Kind : std::uint8_t { NoopMimicry, Splice };

  Kind kind = Kind::NoopMimicry;
  std::size_t insert_at = 0;

  // noop_mimicry: scenario knobs; the inserted run is the no-op variant's
  // tail from the divergence event on (1 + noop_tail_len events).
  ScenarioConfig scenario;

  // splice: a walk of splice_len events from the foreign spec.
  std::optional<ProgramSpec> foreign;
  std::size_t splice_len = 0;
};

struct InjectedTrace {
  TraceSegment trace;
  std::size_t range_begin = 0;  // injected index range [begin, end)
  std::size_t range_end = 0;
};

/// Inserts an anomalous run into `base` at spec.insert_at and reports
/// the inserted index range as localization ground truth.
InjectedTrace inject_anomaly(const TraceSegment& base, const AnomalySpec& spec,
                             std::uint64_t seed);

}  // namespace blm

#endif  // BRANCHLM_TRACEGEN_HPP
