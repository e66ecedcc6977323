#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "isle/bytes.hpp"
#include "isle/entropy.hpp"
#include "isle/error.hpp"
#include "isle/image.hpp"
#include "isle/wavelet.hpp"

namespace isle {

inline constexpr std::uint32_t kDefaultAlpha = 32;

struct Rung {
  int d = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  std::uint32_t min_dim() const { return std::min(width, height); }

  friend bool operator==(const Rung&, const Rung&) = default;
};

/// Resolution ladder of a progressively encoded image. `ladder[d]` is the
/// raster reconstructed from segments 0..d; `ladder[n_levels]` is full size.
struct DecompositionPlan {
  std::uint32_t alpha = kDefaultAlpha;
  int n_levels = 0;
  std::vector<Rung> ladder;

  const Rung& rung(int d) const { return ladder.at(static_cast<std::size_t>(d)); }
  const Rung& full() const { return ladder.back(); }

  friend bool operator==(const DecompositionPlan&, const DecompositionPlan&) = default;
};

/// N = floor(log2(min(width, height) / alpha)), evaluated in exact integers.
inline DecompositionPlan plan_decompositions(std::uint32_t width, std::uint32_t height,
                                             std::uint32_t alpha = kDefaultAlpha) {
  if (alpha < 1) fail(ErrorKind::validation, "alpha must be >= 1");
  const std::uint64_t min_dim = std::min(width, height);
  if (min_dim < 2ull * alpha) {
    fail(ErrorKind::validation, "image " + std::to_string(width) + "x" + std::to_string(height) +
                                    " too small for any decomposition at alpha " + std::to_string(alpha));
  }
  int n = 0;
  while ((std::uint64_t{alpha} << (n + 1)) <= min_dim) ++n;

  DecompositionPlan plan;
  plan.alpha = alpha;
  plan.n_levels = n;
  plan.ladder.resize(static_cast<std::size_t>(n) + 1);
  std::uint32_t w = width, h = height;
  for (int d = n; d >= 0; --d) {
    plan.ladder[static_cast<std::size_t>(d)] = {d, w, h};
    w = ceil_half(w);
    h = ceil_half(h);
  }
  return plan;
}

/// Coefficient count carried by segment `k` (0 = base LL, k >= 1 = the
/// detail group that lifts rung k-1 to rung k).
inline std::size_t segment_coefficients(const DecompositionPlan& plan, int k) {
  const auto& r = plan.rung(k);
  if (k == 0) return std::size_t(r.width) * r.height;
  const auto& below = plan.rung(k - 1);
  return std::size_t(r.width) * r.height - std::size_t(below.width) * below.height;
}

// ---------------------------------------------------------------------------
// .islc layout (all multi-byte integers big-endian):
//   header  18 bytes  magic "ISLC" | version u8 | width u32 | height u32 |
//                     bit_depth u8 | alpha u16 | n_levels u8 | present_segments u8
//   index   (n_levels + 1) x { offset u64, length u64 }, offsets relative to payload
//   payload the first present_segments segments, back to back

inline constexpr std::array<std::uint8_t, 4> kCodestreamMagic{'I', 'S', 'L', 'C'};
inline constexpr std::uint8_t kCodestreamVersion = 1;
inline constexpr std::size_t kHeaderBytes = 18;
inline constexpr std::size_t kIndexEntryBytes = 16;
inline constexpr std::size_t kPresentSegmentsOffset = 17;

struct CodestreamHeader {
  std::uint8_t version = kCodestreamVersion;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t bit_depth = 8;
  std::uint16_t alpha = kDefaultAlpha;
  std::uint8_t n_levels = 0;
  std::uint8_t present_segments = 0;

  friend bool operator==(const CodestreamHeader&, const CodestreamHeader&) = default;
};

struct SegmentEntry {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  friend bool operator==(const SegmentEntry&, const SegmentEntry&) = default;
};

struct Codestream {
  CodestreamHeader header;
  std::vector<SegmentEntry> index;  // always n_levels + 1 entries
  Bytes payload;                    // first header.present_segments segments

  int n_levels() const { return header.n_levels; }
  int max_available_d() const { return header.present_segments - 1; }

  DecompositionPlan plan() const { return plan_decompositions(header.width, header.height, header.alpha); }

  /// Payload bytes needed to reconstruct decomposition `d`.
  std::uint64_t prefix_bytes(int d) const {
    const auto& e = index.at(static_cast<std::size_t>(d));
    return e.offset + e.length;
  }

  std::uint64_t full_payload_bytes() const { return prefix_bytes(n_levels()); }

  std::size_t metadata_bytes() const { return kHeaderBytes + index.size() * kIndexEntryBytes; }

  ByteView segment(int k) const {
    const auto& e = index.at(static_cast<std::size_t>(k));
    return ByteView(payload).subspan(e.offset, e.length);
  }

  friend bool operator==(const Codestream&, const Codestream&) = default;
};

inline Codestream encode(const Image& img, std::uint32_t alpha = kDefaultAlpha) {
  validate(img);
  if (alpha > 0xffff) fail(ErrorKind::validation, "alpha must fit in 16 bits");
  const auto plan = plan_decompositions(img.width, img.height, alpha);
  if (plan.n_levels > 0xff) fail(ErrorKind::validation, "too many decomposition levels");
  const auto pyr = forward_2d(img, plan.n_levels);

  Codestream cs;
  cs.header = {kCodestreamVersion, img.width, img.height, img.bit_depth, static_cast<std::uint16_t>(alpha),
               static_cast<std::uint8_t>(plan.n_levels), static_cast<std::uint8_t>(plan.n_levels + 1)};
  auto emit_segment = [&](auto&& write) {
    const auto start = cs.payload.size();
    write();
    cs.index.push_back({start, cs.payload.size() - start});
  };
  emit_segment([&] { entropy_encode_into(cs.payload, pyr.base_ll.plane.samples); });
  for (int level = plan.n_levels; level >= 1; --level) {
    const auto& group = pyr.level(level);
    // HL, LH and HH share one token stream so runs may cross band borders.
    std::vector<Coeff> joined;
    joined.reserve(group.coefficient_count());
    for (const auto* band : {&group.hl, &group.lh, &group.hh}) {
      joined.insert(joined.end(), band->plane.samples.begin(), band->plane.samples.end());
    }
    emit_segment([&] { entropy_encode_into(cs.payload, joined); });
  }
  return cs;
}

inline Bytes serialize_metadata(const Codestream& cs) {
  Bytes out(kCodestreamMagic.begin(), kCodestreamMagic.end());
  out.reserve(cs.metadata_bytes() + cs.payload.size());
  const auto& h = cs.header;
  out.push_back(h.version);
  put_be<std::uint32_t>(out, h.width);
  put_be<std::uint32_t>(out, h.height);
  out.push_back(h.bit_depth);
  put_be<std::uint16_t>(out, h.alpha);
  out.push_back(h.n_levels);
  out.push_back(h.present_segments);
  for (const auto& e : cs.index) {
    put_be<std::uint64_t>(out, e.offset);
    put_be<std::uint64_t>(out, e.length);
  }
  return out;
}

inline Bytes serialize(const Codestream& cs) {
  auto out = serialize_metadata(cs);
  out.insert(out.end(), cs.payload.begin(), cs.payload.end());
  return out;
}

inline Codestream parse(ByteView bytes) {
  if (bytes.size() < kHeaderBytes) fail(ErrorKind::validation, "codestream shorter than its 18-byte header");
  if (!std::equal(kCodestreamMagic.begin(), kCodestreamMagic.end(), bytes.begin())) {
    fail(ErrorKind::validation, "bad codestream magic (expected ISLC)");
  }
  Codestream cs;
  auto& h = cs.header;
  h.version = bytes[4];
  if (h.version != kCodestreamVersion) {
    fail(ErrorKind::validation, "unsupported codestream version " + std::to_string(h.version));
  }
  h.width = get_be<std::uint32_t>(bytes, 5);
  h.height = get_be<std::uint32_t>(bytes, 9);
  h.bit_depth = bytes[13];
  h.alpha = get_be<std::uint16_t>(bytes, 14);
  h.n_levels = bytes[16];
  h.present_segments = bytes[kPresentSegmentsOffset];
  if (h.width == 0 || h.height == 0) fail(ErrorKind::validation, "codestream declares zero extent");
  if (h.bit_depth != 8 && h.bit_depth != 16) fail(ErrorKind::validation, "codestream bit depth must be 8 or 16");
  if (h.n_levels < 1) fail(ErrorKind::validation, "codestream declares no decomposition levels");
  if (h.present_segments < 1 || h.present_segments > h.n_levels + 1) {
    fail(ErrorKind::validation, "present_segments " + std::to_string(h.present_segments) + " outside [1, " +
                                    std::to_string(h.n_levels + 1) + "]");
  }
  if (h.alpha < 1 || cs.plan().n_levels != h.n_levels) {
    fail(ErrorKind::validation, "n_levels inconsistent with dimensions and alpha");
  }

  const std::size_t n_segments = std::size_t(h.n_levels) + 1;
  const std::size_t metadata = kHeaderBytes + n_segments * kIndexEntryBytes;
  if (bytes.size() < metadata) fail(ErrorKind::validation, "codestream segment index truncated");
  std::uint64_t expected_offset = 0;
  for (std::size_t k = 0; k < n_segments; ++k) {
    const std::size_t at = kHeaderBytes + k * kIndexEntryBytes;
    SegmentEntry e{get_be<std::uint64_t>(bytes, at), get_be<std::uint64_t>(bytes, at + 8)};
    if (e.offset != expected_offset || e.length > UINT64_MAX - e.offset) {
      fail(ErrorKind::validation, "segment index not contiguous at segment " + std::to_string(k));
    }
    expected_offset = e.offset + e.length;
    cs.index.push_back(e);
  }

  const std::uint64_t available = bytes.size() - metadata;
  const std::uint64_t declared = cs.prefix_bytes(h.present_segments - 1);
  if (available < declared) {
    int missing = 0;
    while (cs.prefix_bytes(missing) <= available) ++missing;
    fail(ErrorKind::validation, "codestream truncated: segment " + std::to_string(missing) + " missing " +
                                    std::to_string(cs.prefix_bytes(missing) - available) + " byte(s)");
  }
  if (available > declared) {
    fail(ErrorKind::validation, "trailing " + std::to_string(available - declared) + " byte(s) after declared payload");
  }
  cs.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(metadata), bytes.end());
  return cs;
}

inline Codestream truncate(const Codestream& cs, int d) {
  if (d < 0 || d > cs.n_levels()) {
    fail(ErrorKind::range, "decomposition " + std::to_string(d) + " outside [0, " + std::to_string(cs.n_levels()) + "]");
  }
  if (d > cs.max_available_d()) {
    fail(ErrorKind::range, "stream already truncated to decomposition " + std::to_string(cs.max_available_d()));
  }
  Codestream out;
  out.header = cs.header;
  out.header.present_segments = static_cast<std::uint8_t>(d + 1);
  out.index = cs.index;
  out.payload.assign(cs.payload.begin(), cs.payload.begin() + static_cast<std::ptrdiff_t>(cs.prefix_bytes(d)));
  return out;
}

/// Entropy-decodes segments 0..d into a pyramid whose finer groups are empty.
/// Every segment is checked before any reconstruction happens.
inline Pyramid decode_pyramid(const Codestream& cs, int d) {
  if (d < 0 || d > cs.max_available_d()) {
    fail(ErrorKind::range, "decomposition " + std::to_string(d) + " not available (stream holds 0.." +
                               std::to_string(cs.max_available_d()) + ")");
  }
  const auto plan = cs.plan();
  const int n = plan.n_levels;
  Pyramid pyr;
  pyr.levels = n;
  pyr.details.resize(static_cast<std::size_t>(n));
  const auto& base = plan.rung(0);
  pyr.base_ll = {BandKind::LL, n, {base.width, base.height, entropy_decode(cs.segment(0), segment_coefficients(plan, 0))}};
  for (int k = 1; k <= d; ++k) {
    const int level = n - k + 1;
    const auto coeffs = entropy_decode(cs.segment(k), segment_coefficients(plan, k));
    const auto& parent = plan.rung(k);
    const auto [lw, hw, lh, hh] = split_dims(parent.width, parent.height);
    auto take = [&, pos = std::size_t{0}](BandKind kind, std::uint32_t w, std::uint32_t h) mutable {
      const auto count = std::size_t(w) * h;
      Subband band{kind, level, {w, h, std::vector<Coeff>(coeffs.begin() + pos, coeffs.begin() + pos + count)}};
      pos += count;
      return band;
    };
    auto& group = pyr.details[static_cast<std::size_t>(level - 1)];
    group.hl = take(BandKind::HL, hw, lh);
    group.lh = take(BandKind::LH, lw, hh);
    group.hh = take(BandKind::HH, hw, hh);
  }
  return pyr;
}

/// Reconstruction at decomposition `d` before clamping to the pixel range.
inline Plane decode_partial_unclamped(const Codestream& cs, int d) {
  return inverse_2d(decode_pyramid(cs, d), d);
}

inline Image decode_partial(const Codestream& cs, int d) {
  return materialize(decode_partial_unclamped(cs, d), cs.header.bit_depth);
}

inline Image decode(const Codestream& cs) { return decode_partial(cs, cs.max_available_d()); }

}  // namespace isle
