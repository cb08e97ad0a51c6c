// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BRANCHLM_PACKET_HPP
#define BRANCHLM_PACKET_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace blm {

// SPT binary packet format (.spt), byte-exact:
//
//   0x00 PAD       1 byte, no payload, ignored.
//   0x01 TNT       header + 1 payload byte. Payload must be nonzero. The
//                  most significant set bit is a sentinel; the bits strictly
//                  below it, read MSB-first, are branch outcomes
//                  (1 = taken, 0 = not taken). Payload 0x01 carries zero
//                  outcomes and is malformed. 1..7 outcomes per packet.
//   0x02 TIP       header + 8-byte little-endian target address.
//   0x03 FUP       header + 8-byte little-endian source address.
//   0x04 BOUNDARY  1 byte; terminates the current segment.
//
// Any other header byte is malformed. A truncated final packet is an
// error, not a silent EOF.

struct TntPacket {
  std::vector<bool> outcomes;  // MSB-first order, size in [1, 7]
  friend bool operator==(const TntPacket&, const TntPacket&) = default;
};
struct TipPacket {
  std::uint64_t target = 0;
  friend bool operator==(const TipPacket&, const TipPacket&) = default;
};
struct FupPacket {
  std::uint64_t source = 0;
  friend bool operator==(const FupPacket&, const FupPacket&) = default;
};
struct PadPacket {
  friend bool operator==(const PadPacket&, const PadPacket&) = default;
};
struct BoundaryPacket {
  friend bool operator==(const BoundaryPacket&, const BoundaryPacket&) = default;
};

using Packet = std::variant<PadPacket, TntPacket, TipPacket, FupPacket, BoundaryPacket>;

/// One branch event: a conditional direction (from a TNT outcome bit) or
/// an indirect-transfer target (from a TIP packet). FUP and PAD packets
/// produce no events.
struct BranchEvent {
  enum class Kind : std::uint8_t { Direction, Target };

  Kind kind = Kind::Direction;
  bool taken = false;          // meaningful when kind == Direction
  std::uint64_t address = 0;   // meaningful when kind == Target

  static BranchEvent direction(bool taken) {
    BranchEvent e;
    e.kind = Kind::Direction;
    e.taken = taken;
    return e;
  }
  static BranchEvent target(std::uint64_t address) {
    BranchEvent e;
    e.kind = Kind::Target;
    e.address = address;
    return e;
  }

  friend bool operator==(const BranchEvent&, const BranchEvent&) = default;
};

/// Ordered branch events of one execution, delimited by BOUNDARY packets.
struct TraceSegment {
  std::size_t segment_index = 0;
  std::vector<BranchEvent> events;

  friend bool operator==(const TraceSegment&, const TraceSegment&) = default;
};

/// Corrupt input. `offset` is the byte offset of the packet that failed
/// to decode; stream decoding aborts at the first malformed packet.
class MalformedPacketError : public std::runtime_error {
 public:
  MalformedPacketError(std::size_t offset, const std::string& what)
      : std::runtime_error("malformed packet at offset " + std::to_string(offset) +
                           ": " + what),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct DecodedPacket {
  Packet packet;
  std::size_t next_offset = 0;
};

/// Decodes the packet starting at `offset`. Consumes exactly the bytes the
/// format defines; next_offset always exceeds offset.
DecodedPacket decode_packet(const std::vector<std::uint8_t>& buffer, std::size_t offset);

/// Decodes a whole stream into segments. Segments split at BOUNDARY
/// packets; empty segments are dropped; trailing events after the last
/// BOUNDARY form a final segment only if non-empty. TNT packets expand to
/// one Direction event per outcome bit, TIP to one Target event.
std::vector<TraceSegment> decode_stream(const std::vector<std::uint8_t>& buffer);

/// Canonical encoding: runs of Direction events are greedily packed into
/// TNT packets of up to 7 outcomes, each Target becomes one TIP, each
/// segment is terminated by BOUNDARY. No PAD or FUP is emitted.
/// decode_stream(encode_stream(s)) == s for segment lists whose segments
/// are non-empty and indexed 0..n-1.
std::vector<std::uint8_t> encode_stream(const std::vector<TraceSegment>& segments);

/// Text dump, one event per line: `T` / `N` for directions, `0x%016x` for
/// targets, a `--` line between consecutive segments.
std::string dump_events(const std::vector<TraceSegment>& segments);

}  // namespace blm

#endif  // BRANCHLM_PACKET_HPP
