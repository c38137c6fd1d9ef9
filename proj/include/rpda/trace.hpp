// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rpda/protocol_sim.hpp"

namespace rpda {

inline constexpr std::uint32_t kTraceMagic = 0x54445052;  // "RPDT"
inline constexpr std::uint32_t kTraceVersion = 1;

struct TraceHeader {
  std::uint32_t magic = kTraceMagic;
  std::uint32_t version = kTraceVersion;
  std::uint32_t antennas = 0;
  std::uint32_t devices = 0;
  std::uint32_t slot_length = 0;
  std::uint32_t pilot_length = 0;
  std::uint64_t seed = 0;
};

/// Little-endian stream of SlotOutcome records behind a TraceHeader.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, const TraceHeader& header);
  void write(std::uint32_t slot, const SlotOutcome& outcome);

 private:
  std::ostream& out_;
};

struct TraceRecord {
  std::uint32_t slot = 0;
  SlotOutcome outcome;
};

struct Trace {
  TraceHeader header;
  std::vector<TraceRecord> records;
};

/// Throws std::runtime_error on a bad magic, version or truncated record.
Trace read_trace(std::istream& in);

}  // namespace rpda
