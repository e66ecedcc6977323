#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "isle/error.hpp"
#include "isle/image.hpp"

namespace isle {

// Reversible CDF 5/3 lifting with whole-sample symmetric extension. Even
// samples become the low-pass band (ceil(n/2) of them), odd samples the
// high-pass band (floor(n/2)). All arithmetic is exact integer; `>>` on a
// signed value is floor division by a power of two.

using Coeff = std::int64_t;

/// Widened-integer raster. Intermediate LL bands are stored in this form.
struct Plane {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<Coeff> samples;

  Coeff& operator()(std::uint32_t x, std::uint32_t y) { return samples[std::size_t(y) * width + x]; }
  Coeff operator()(std::uint32_t x, std::uint32_t y) const { return samples[std::size_t(y) * width + x]; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

inline std::uint32_t ceil_half(std::uint32_t n) { return (n + 1) / 2; }
inline std::uint32_t floor_half(std::uint32_t n) { return n / 2; }

namespace detail {

// In-place kernels over strided data so rows and columns share one path.
inline void lift_forward(const Coeff* in, std::size_t n, std::ptrdiff_t stride, Coeff* low,
                         Coeff* high, std::ptrdiff_t out_stride) {
  if (n == 1) {
    low[0] = in[0];
    return;
  }
  const std::size_t n_low = (n + 1) / 2;
  const std::size_t n_high = n / 2;
  auto x = [&](std::size_t i) { return in[static_cast<std::ptrdiff_t>(i) * stride]; };
  for (std::size_t i = 0; i < n_high; ++i) {
    const Coeff right = (2 * i + 2 < n) ? x(2 * i + 2) : x(2 * i);  // x[n] mirrors x[n-2]
    high[i * out_stride] = x(2 * i + 1) - ((x(2 * i) + right) >> 1);
  }
  for (std::size_t i = 0; i < n_low; ++i) {
    const Coeff left = high[(i == 0 ? 0 : i - 1) * out_stride];
    const Coeff right = high[(i < n_high ? i : n_high - 1) * out_stride];
    low[i * out_stride] = x(2 * i) + ((left + right + 2) >> 2);
  }
}

inline void lift_inverse(const Coeff* low, const Coeff* high, std::ptrdiff_t in_stride,
                         std::size_t n, Coeff* out, std::ptrdiff_t stride) {
  if (n == 1) {
    out[0] = low[0];
    return;
  }
  const std::size_t n_low = (n + 1) / 2;
  const std::size_t n_high = n / 2;
  auto y = [&](std::size_t i) -> Coeff& { return out[static_cast<std::ptrdiff_t>(i) * stride]; };
  for (std::size_t i = 0; i < n_low; ++i) {
    const Coeff left = high[(i == 0 ? 0 : i - 1) * in_stride];
    const Coeff right = high[(i < n_high ? i : n_high - 1) * in_stride];
    y(2 * i) = low[i * in_stride] - ((left + right + 2) >> 2);
  }
  for (std::size_t i = 0; i < n_high; ++i) {
    const Coeff right = (2 * i + 2 < n) ? y(2 * i + 2) : y(2 * i);
    y(2 * i + 1) = high[i * in_stride] + ((y(2 * i) + right) >> 1);
  }
}

}  // namespace detail

inline std::pair<std::vector<Coeff>, std::vector<Coeff>> forward_1d(std::span<const Coeff> signal) {
  if (signal.empty()) fail(ErrorKind::validation, "forward_1d: empty signal");
  std::vector<Coeff> low((signal.size() + 1) / 2);
  std::vector<Coeff> high(signal.size() / 2);
  detail::lift_forward(signal.data(), signal.size(), 1, low.data(), high.data(), 1);
  return {std::move(low), std::move(high)};
}

inline std::vector<Coeff> inverse_1d(std::span<const Coeff> approx, std::span<const Coeff> detail) {
  if (approx.empty() || (approx.size() != detail.size() && approx.size() != detail.size() + 1)) {
    fail(ErrorKind::validation, "inverse_1d: incompatible band lengths");
  }
  std::vector<Coeff> out(approx.size() + detail.size());
  detail::lift_inverse(approx.data(), detail.data(), 1, out.size(), out.data(), 1);
  return out;
}

enum class BandKind : std::uint8_t { LL, HL, LH, HH };

struct Subband {
  BandKind kind = BandKind::LL;
  int level = 0;  // 1 = finest
  Plane plane;

  friend bool operator==(const Subband&, const Subband&) = default;
};

struct DetailGroup {
  Subband hl, lh, hh;

  std::size_t coefficient_count() const {
    return hl.plane.samples.size() + lh.plane.samples.size() + hh.plane.samples.size();
  }

  friend bool operator==(const DetailGroup&, const DetailGroup&) = default;
};

/// Multi-level decomposition. `details[i]` holds level i+1, so `details.back()`
/// is the coarsest group, the first one applied on reconstruction.
struct Pyramid {
  int levels = 0;
  Subband base_ll;
  std::vector<DetailGroup> details;

  const DetailGroup& level(int l) const { return details.at(static_cast<std::size_t>(l - 1)); }

  friend bool operator==(const Pyramid&, const Pyramid&) = default;
};

/// Band dimensions of one split of a `width` x `height` parent.
struct SplitDims {
  std::uint32_t low_w, high_w, low_h, high_h;
};

inline SplitDims split_dims(std::uint32_t width, std::uint32_t height) {
  return {ceil_half(width), floor_half(width), ceil_half(height), floor_half(height)};
}

namespace detail {

inline Plane copy_region(const Plane& src, std::uint32_t x0, std::uint32_t y0, std::uint32_t w,
                         std::uint32_t h) {
  Plane out{w, h, std::vector<Coeff>(std::size_t(w) * h)};
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) out(x, y) = src(x0 + x, y0 + y);
  }
  return out;
}

inline void paste_region(Plane& dst, const Plane& src, std::uint32_t x0, std::uint32_t y0) {
  for (std::uint32_t y = 0; y < src.height; ++y) {
    for (std::uint32_t x = 0; x < src.width; ++x) dst(x0 + x, y0 + y) = src(x, y);
  }
}

/// One analysis level: rows then columns; quadrants LL | HL over LH | HH.
inline Plane analyze(const Plane& in) {
  const auto lw = ceil_half(in.width);
  const auto lh = ceil_half(in.height);
  Plane rows{in.width, in.height, std::vector<Coeff>(in.samples.size())};
  for (std::uint32_t y = 0; y < in.height; ++y) {
    const Coeff* src = in.samples.data() + std::size_t(y) * in.width;
    Coeff* dst = rows.samples.data() + std::size_t(y) * in.width;
    lift_forward(src, in.width, 1, dst, dst + lw, 1);
  }
  Plane out{in.width, in.height, std::vector<Coeff>(in.samples.size())};
  const auto w = static_cast<std::ptrdiff_t>(in.width);
  for (std::uint32_t x = 0; x < in.width; ++x) {
    const Coeff* src = rows.samples.data() + x;
    Coeff* dst = out.samples.data() + x;
    lift_forward(src, in.height, w, dst, dst + std::ptrdiff_t(lh) * w, w);
  }
  return out;
}

inline Plane synthesize(const Plane& in) {
  const auto lw = ceil_half(in.width);
  const auto lh = ceil_half(in.height);
  const auto w = static_cast<std::ptrdiff_t>(in.width);
  Plane cols{in.width, in.height, std::vector<Coeff>(in.samples.size())};
  for (std::uint32_t x = 0; x < in.width; ++x) {
    const Coeff* src = in.samples.data() + x;
    lift_inverse(src, src + std::ptrdiff_t(lh) * w, w, in.height, cols.samples.data() + x, w);
  }
  Plane out{in.width, in.height, std::vector<Coeff>(in.samples.size())};
  for (std::uint32_t y = 0; y < in.height; ++y) {
    const Coeff* src = cols.samples.data() + std::size_t(y) * in.width;
    lift_inverse(src, src + lw, 1, in.width, out.samples.data() + std::size_t(y) * in.width, 1);
  }
  return out;
}

}  // namespace detail

inline Plane to_plane(const Image& img) {
  return {img.width, img.height, std::vector<Coeff>(img.pixels.begin(), img.pixels.end())};
}

/// Largest level count `forward_2d` accepts: every split needs both dims >= 2.
inline int max_levels(std::uint32_t width, std::uint32_t height) {
  int levels = 0;
  while (width >= 2 && height >= 2) {
    width = ceil_half(width);
    height = ceil_half(height);
    ++levels;
  }
  return levels;
}

inline Pyramid forward_2d(const Plane& source, int levels) {
  if (levels < 1) fail(ErrorKind::validation, "forward_2d: levels must be >= 1");
  if (levels > max_levels(source.width, source.height)) {
    fail(ErrorKind::validation, "forward_2d: too many levels for a " + std::to_string(source.width) +
                                    "x" + std::to_string(source.height) + " image");
  }
  Pyramid pyr;
  pyr.levels = levels;
  Plane current = source;
  for (int level = 1; level <= levels; ++level) {
    const auto [lw, hw, lh, hh] = split_dims(current.width, current.height);
    Plane bands = detail::analyze(current);
    DetailGroup group{
        {BandKind::HL, level, detail::copy_region(bands, lw, 0, hw, lh)},
        {BandKind::LH, level, detail::copy_region(bands, 0, lh, lw, hh)},
        {BandKind::HH, level, detail::copy_region(bands, lw, lh, hw, hh)},
    };
    pyr.details.push_back(std::move(group));
    current = detail::copy_region(bands, 0, 0, lw, lh);
  }
  pyr.base_ll = {BandKind::LL, levels, std::move(current)};
  return pyr;
}

inline Pyramid forward_2d(const Image& img, int levels) {
  validate(img);
  return forward_2d(to_plane(img), levels);
}

/// Synthesizes one level: `ll` plus the level's detail group gives the parent LL.
inline Plane synthesize_level(const Plane& ll, const DetailGroup& group) {
  const std::uint32_t width = ll.width + group.hl.plane.width;
  const std::uint32_t height = ll.height + group.lh.plane.height;
  if (group.hl.plane.height != ll.height || group.lh.plane.width != ll.width ||
      group.hh.plane.width != group.hl.plane.width || group.hh.plane.height != group.lh.plane.height ||
      ceil_half(width) != ll.width || ceil_half(height) != ll.height) {
    fail(ErrorKind::validation, "detail bands do not tile the parent LL");
  }
  Plane bands{width, height, std::vector<Coeff>(std::size_t(width) * height)};
  detail::paste_region(bands, ll, 0, 0);
  detail::paste_region(bands, group.hl.plane, ll.width, 0);
  detail::paste_region(bands, group.lh.plane, 0, ll.height);
  detail::paste_region(bands, group.hh.plane, ll.width, ll.height);
  return detail::synthesize(bands);
}

/// Applies the `levels_to_apply` coarsest detail groups to the base LL and
/// returns the LL at depth `levels - levels_to_apply`, unclamped.
inline Plane inverse_2d(const Pyramid& pyr, int levels_to_apply) {
  if (levels_to_apply < 0 || levels_to_apply > pyr.levels) {
    fail(ErrorKind::range, "inverse_2d: levels_to_apply outside [0, " + std::to_string(pyr.levels) + "]");
  }
  Plane current = pyr.base_ll.plane;
  for (int step = 0; step < levels_to_apply; ++step) {
    current = synthesize_level(current, pyr.level(pyr.levels - step));
  }
  return current;
}

/// Clamps into the bit-depth range and narrows to an Image.
inline Image materialize(const Plane& plane, std::uint8_t bit_depth) {
  Image img{plane.width, plane.height, bit_depth, std::vector<std::uint16_t>(plane.samples.size())};
  const Coeff top = (Coeff{1} << bit_depth) - 1;
  for (std::size_t i = 0; i < plane.samples.size(); ++i) {
    img.pixels[i] = static_cast<std::uint16_t>(std::clamp<Coeff>(plane.samples[i], 0, top));
  }
  return img;
}

}  // namespace isle
