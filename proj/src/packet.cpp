// Copyright 2026 The branchlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "branchlm/packet.hpp"

#include <bit>
#include <cstdio>

namespace blm {

namespace {

constexpr std::uint8_t kPad = 0x00;
constexpr std::uint8_t kTnt = 0x01;
constexpr std::uint8_t kTip = 0x02;
constexpr std::uint8_t kFup = 0x03;
constexpr std::uint8_t kBoundary = 0x04;

std::uint64_t read_u64_le(const std::vector<std::uint8_t>& buf, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
  }
  return v;
}

void write_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

}  // namespace

DecodedPacket decode_packet(const std::vector<std::uint8_t>& buffer, std::size_t offset) {
  if (offset >= buffer.size()) {
    throw MalformedPacketError(offset, "read past end of buffer");
  }
  const std::uint8_t header = buffer[offset];
  switch (header) {
    case kPad:
      return {PadPacket{}, offset + 1};
    case kBoundary:
      return {BoundaryPacket{}, offset + 1};
    case kTnt: {
      if (offset + 1 >= buffer.size()) {
        throw MalformedPacketError(offset, "truncated TNT payload");
      }
      const std::uint8_t payload = buffer[offset + 1];
      if (payload == 0) {
        throw MalformedPacketError(offset, "TNT payload lacks sentinel bit");
      }
      const int sentinel = std::bit_width(payload) - 1;  // bit index of MSB
      if (sentinel == 0) {
        throw MalformedPacketError(offset, "TNT payload carries zero outcomes");
      }
      TntPacket tnt;
      tnt.outcomes.reserve(static_cast<std::size_t>(sentinel));
      for (int bit = sentinel - 1; bit >= 0; --bit) {
        tnt.outcomes.push_back(((payload >> bit) & 1) != 0);
      }
      return {std::move(tnt), offset + 2};
    }
    case kTip: {
      if (offset + 9 > buffer.size()) {
        throw MalformedPacketError(offset, "truncated TIP payload");
      }
      return {TipPacket{read_u64_le(buffer, offset + 1)}, offset + 9};
    }
    case kFup: {
      if (offset + 9 > buffer.size()) {
        throw MalformedPacketError(offset, "truncated FUP payload");
      }
      return {FupPacket{read_u64_le(buffer, offset + 1)}, offset + 9};
    }
    default: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "unknown header byte 0x%02x", header);
      throw MalformedPacketError(offset, buf);
    }
  }
}

std::vector<TraceSegment> decode_stream(const std::vector<std::uint8_t>& buffer) {
  std::vector<TraceSegment> segments;
  std::vector<BranchEvent> current;
  std::size_t offset = 0;

  auto flush = [&] {
    if (!current.empty()) {
      segments.push_back(TraceSegment{segments.size(), std::move(current)});
      current = {};
    }
  };

  while (offset < buffer.size()) {
    DecodedPacket decoded = decode_packet(buffer, offset);
    offset = decoded.next_offset;
    if (const auto* tnt = std::get_if<TntPacket>(&decoded.packet)) {
      for (bool taken : tnt->outcomes) {
        current.push_back(BranchEvent::direction(taken));
      }
    } else if (const auto* tip = std::get_if<TipPacket>(&decoded.packet)) {
      current.push_back(BranchEvent::target(tip->target));
    } else if (std::holds_alternative<BoundaryPacket>(decoded.packet)) {
      flush();
    }
    // PAD and FUP contribute no events.
  }
  flush();
  return segments;
}

std::vector<std::uint8_t> encode_stream(const std::vector<TraceSegment>& segments) {
  std::vector<std::uint8_t> out;
  for (const TraceSegment& segment : segments) {
    std::size_t i = 0;
    while (i < segment.events.size()) {
      const BranchEvent& event = segment.events[i];
      if (event.kind == BranchEvent::Kind::Target) {
        out.push_back(kTip);
        write_u64_le(out, event.address);
        ++i;
        continue;
      }
      // Greedily pack up to 7 consecutive direction events into one TNT.
      std::size_t run = 0;
      while (run < 7 && i + run < segment.events.size() &&
             segment.events[i + run].kind == BranchEvent::Kind::Direction) {
        ++run;
      }
      std::uint8_t payload = static_cast<std::uint8_t>(1u << run);  // sentinel
      for (std::size_t j = 0; j < run; ++j) {
        if (segment.events[i + j].taken) {
          payload |= static_cast<std::uint8_t>(1u << (run - 1 - j));
        }
      }
      out.push_back(kTnt);
      out.push_back(payload);
      i += run;
    }
    out.push_back(kBoundary);
  }
  return out;
}

std::string dump_events(const std::vector<TraceSegment>& segments) {
  std::string out;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (s != 0) {
      out += "--\n";
    }
    for (const BranchEvent& event : segments[s].events) {
      if (event.kind == BranchEvent::Kind::Direction) {
        out += event.taken ? "T\n" : "N\n";
      } else {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "0x%016llx",
                      static_cast<unsigned long long>(event.address));
        out += buf;
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace blm
