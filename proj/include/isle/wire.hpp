#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "isle/bytes.hpp"
#include "isle/error.hpp"

namespace isle::wire {

// Request:  "ISLE" | version u8 | opcode u8 | asset_id_len u16 | asset_id | d i8
// Response: "ISLE" | version u8 | status u8 | payload_len u64 | payload
// Multi-byte integers are big-endian.

inline constexpr std::array<std::uint8_t, 4> kMagic{'I', 'S', 'L', 'E'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kRequestFixedBytes = 8;  // before asset_id
inline constexpr std::size_t kResponseHeaderBytes = 14;
inline constexpr std::int8_t kFullStream = -1;

enum class Opcode : std::uint8_t { list = 0x01, head = 0x02, fetch = 0x03 };

enum class Status : std::uint8_t { ok = 0, not_found = 1, bad_request = 2, range = 3 };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "OK";
    case Status::not_found: return "NOT_FOUND";
    case Status::bad_request: return "BAD_REQUEST";
    case Status::range: return "RANGE";
  }
  return "UNKNOWN";
}

struct Request {
  Opcode opcode = Opcode::fetch;
  std::string asset_id;
  std::int8_t d = kFullStream;

  friend bool operator==(const Request&, const Request&) = default;
};

inline Bytes encode_request(const Request& r) {
  if (r.asset_id.size() > 0xffff) fail(ErrorKind::validation, "asset id too long for the wire");
  Bytes out(kMagic.begin(), kMagic.end());
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(r.opcode));
  put_be<std::uint16_t>(out, static_cast<std::uint16_t>(r.asset_id.size()));
  out.insert(out.end(), r.asset_id.begin(), r.asset_id.end());
  out.push_back(static_cast<std::uint8_t>(r.d));
  return out;
}

struct RequestPrefix {
  std::uint8_t version = 0;
  std::uint8_t opcode = 0;
  std::uint16_t asset_id_len = 0;
};

/// Decodes the fixed 8-byte request prefix; nullopt when the magic is wrong.
inline std::optional<RequestPrefix> decode_request_prefix(ByteView fixed) {
  if (fixed.size() != kRequestFixedBytes || !std::equal(kMagic.begin(), kMagic.end(), fixed.begin())) {
    return std::nullopt;
  }
  return RequestPrefix{fixed[4], fixed[5], get_be<std::uint16_t>(fixed, 6)};
}

/// Full-request validation, shared by the server and tests. Returns the
/// status a server must answer with when the request is malformed.
inline std::optional<Status> validate_request(const RequestPrefix& prefix, std::string_view asset_id, std::int8_t d) {
  if (prefix.version != kVersion) return Status::bad_request;
  const auto op = static_cast<Opcode>(prefix.opcode);
  if (op != Opcode::list && op != Opcode::head && op != Opcode::fetch) return Status::bad_request;
  if (op != Opcode::list && asset_id.empty()) return Status::bad_request;
  if (op == Opcode::fetch && d < kFullStream) return Status::bad_request;
  return std::nullopt;
}

inline Bytes encode_response_header(Status status, std::uint64_t payload_len) {
  Bytes out(kMagic.begin(), kMagic.end());
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(status));
  put_be<std::uint64_t>(out, payload_len);
  return out;
}

struct ResponseHeader {
  Status status = Status::ok;
  std::uint64_t payload_len = 0;
};

inline ResponseHeader decode_response_header(ByteView bytes) {
  if (bytes.size() != kResponseHeaderBytes || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    fail(ErrorKind::network, "malformed response frame");
  }
  if (bytes[4] != kVersion) fail(ErrorKind::network, "unsupported response version " + std::to_string(bytes[4]));
  if (bytes[5] > static_cast<std::uint8_t>(Status::range)) {
    fail(ErrorKind::network, "unknown response status " + std::to_string(bytes[5]));
  }
  return {static_cast<Status>(bytes[5]), get_be<std::uint64_t>(bytes, 6)};
}

}  // namespace isle::wire
