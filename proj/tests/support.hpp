#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "isle/isle.hpp"

namespace isle::test {

/// Seeded random image with some large-scale structure so segments are not
/// pure noise.
inline Image random_image(Rng& rng, std::uint32_t width, std::uint32_t height, std::uint8_t bit_depth) {
  Image img{width, height, bit_depth, std::vector<std::uint16_t>(std::size_t(width) * height)};
  const double top = static_cast<double>(img.max_value());
  const double fx = rng.uniform(0.01, 0.2), fy = rng.uniform(0.01, 0.2);
  const double noise = rng.uniform(0.0, 0.3);
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      const double v = 0.5 + 0.35 * std::sin(fx * x) * std::cos(fy * y) + noise * (rng.uniform() - 0.5);
      img.pixels[std::size_t(y) * width + x] = static_cast<std::uint16_t>(std::clamp(v, 0.0, 1.0) * top);
    }
  }
  return img;
}

inline Image constant_image(std::uint32_t width, std::uint32_t height, std::uint16_t value,
                            std::uint8_t bit_depth = 8) {
  return Image{width, height, bit_depth, std::vector<std::uint16_t>(std::size_t(width) * height, value)};
}

/// All-pairs AUROC: P(pos > neg) + 0.5 P(tie).
inline double brute_force_auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Oracle for one-level partial decode: the LL band of a fresh forward
/// transform computed straight from the pixels, clamped to the pixel range.
inline Image reference_low_resolution(const Image& img, int levels) {
  if (levels == 0) return img;
  const auto pyr = forward_2d(img, levels);
  return materialize(pyr.base_ll.plane, img.bit_depth);
}

/// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace isle::test
