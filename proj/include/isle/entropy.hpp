#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isle/bytes.hpp"
#include "isle/error.hpp"
#include "isle/wavelet.hpp"

namespace isle {

// Coefficient token stream:
//   nonzero c        -> varint(zigzag(c) + 1)
//   run of r zeros   -> varint(0) varint(r)        (runs are maximal)
// varint is little-endian base-128 with the high bit as continuation flag.

inline std::uint64_t zigzag(std::int64_t v) {
  return v >= 0 ? static_cast<std::uint64_t>(v) << 1 : (static_cast<std::uint64_t>(-(v + 1)) << 1) | 1u;
}

inline std::int64_t unzigzag(std::uint64_t u) {
  return (u & 1u) ? -static_cast<std::int64_t>(u >> 1) - 1 : static_cast<std::int64_t>(u >> 1);
}

inline void put_varint(Bytes& out, std::uint64_t value) {
  while (value >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(value | 0x80));
    value >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(value));
}

/// Reads one varint at `pos`, advancing it. Throws on truncation or overflow.
inline std::uint64_t get_varint(ByteView in, std::size_t& pos) {
  std::uint64_t value = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    if (pos >= in.size()) fail(ErrorKind::validation, "entropy stream: truncated varint");
    const std::uint8_t byte = in[pos++];
    const std::uint64_t bits = byte & 0x7f;
    if (shift == 63 && bits > 1) break;
    value |= bits << shift;
    if (!(byte & 0x80)) return value;
  }
  fail(ErrorKind::validation, "entropy stream: varint overflows 64 bits");
}

inline void entropy_encode_into(Bytes& out, std::span<const Coeff> coeffs) {
  std::size_t i = 0;
  while (i < coeffs.size()) {
    if (coeffs[i] != 0) {
      put_varint(out, zigzag(coeffs[i]) + 1);
      ++i;
      continue;
    }
    std::size_t run = 0;
    while (i < coeffs.size() && coeffs[i] == 0) {
      ++run;
      ++i;
    }
    put_varint(out, 0);
    put_varint(out, run);
  }
}

inline Bytes entropy_encode(std::span<const Coeff> coeffs) {
  Bytes out;
  entropy_encode_into(out, coeffs);
  return out;
}

inline std::vector<Coeff> entropy_decode(ByteView bytes, std::size_t expected_count) {
  std::vector<Coeff> out;
  out.reserve(expected_count);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto token = get_varint(bytes, pos);
    if (token != 0) {
      if (out.size() == expected_count) {
        fail(ErrorKind::validation, "entropy stream: more coefficients than expected " + std::to_string(expected_count));
      }
      out.push_back(unzigzag(token - 1));
      continue;
    }
    const auto run = get_varint(bytes, pos);
    if (run == 0 || run > expected_count - out.size()) {
      fail(ErrorKind::validation, "entropy stream: zero run overruns expected count");
    }
    out.resize(out.size() + run, 0);
  }
  if (out.size() != expected_count) {
    fail(ErrorKind::validation, "entropy stream: decoded " + std::to_string(out.size()) + " coefficients, expected " +
                                    std::to_string(expected_count));
  }
  return out;
}

}  // namespace isle
