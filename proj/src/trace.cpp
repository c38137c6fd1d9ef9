// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rpda/trace.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rpda {
namespace {

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T> && (sizeof(T) == 4 || sizeof(T) == 8));
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(v);
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf, sizeof buf);
}

template <class T>
T get(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) {
    throw std::runtime_error("trace truncated");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  put(out, static_cast<std::uint32_t>(v.size()));
  for (double x : v) put(out, x);
}

std::vector<double> get_doubles(std::istream& in) {
  std::vector<double> v(get<std::uint32_t>(in));
  for (double& x : v) x = get<double>(in);
  return v;
}

}  // namespace

TraceWriter::TraceWriter(std::ostream& out, const TraceHeader& h) : out_(out) {
  put(out_, h.magic);
  put(out_, h.version);
  put(out_, h.antennas);
  put(out_, h.devices);
  put(out_, h.slot_length);
  put(out_, h.pilot_length);
  put(out_, h.seed);
}

void TraceWriter::write(std::uint32_t slot, const SlotOutcome& o) {
  put(out_, slot);
  put(out_, static_cast<std::uint32_t>(o.detected.size()));
  for (int j : o.detected) put(out_, static_cast<std::uint32_t>(j));
  put_doubles(out_, o.est_sum_power);
  put_doubles(out_, o.mrc_output_power);
  put_doubles(out_, o.sinr);
}

Trace read_trace(std::istream& in) {
  Trace t;
  t.header.magic = get<std::uint32_t>(in);
  if (t.header.magic != kTraceMagic) throw std::runtime_error("not a trace file");
  t.header.version = get<std::uint32_t>(in);
  if (t.header.version != kTraceVersion) throw std::runtime_error("unsupported trace version");
  t.header.antennas = get<std::uint32_t>(in);
  t.header.devices = get<std::uint32_t>(in);
  t.header.slot_length = get<std::uint32_t>(in);
  t.header.pilot_length = get<std::uint32_t>(in);
  t.header.seed = get<std::uint64_t>(in);
  while (in.peek() != std::char_traits<char>::eof()) {
    TraceRecord r;
    r.slot = get<std::uint32_t>(in);
    r.outcome.detected.resize(get<std::uint32_t>(in));
    for (int& j : r.outcome.detected) j = static_cast<int>(get<std::uint32_t>(in));
    r.outcome.est_sum_power = get_doubles(in);
    r.outcome.mrc_output_power = get_doubles(in);
    r.outcome.sinr = get_doubles(in);
    t.records.push_back(std::move(r));
  }
  return t;
}

}  // namespace rpda
