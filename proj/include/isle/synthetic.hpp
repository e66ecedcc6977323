#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isle/error.hpp"
#include "isle/image.hpp"

namespace isle {

/// Portable seeded generator. std::mt19937_64's output sequence is fixed by
/// the standard; the distributions below are hand-rolled because the
/// standard library's are not reproducible across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return radius * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Where and how large each label's blob is, in coordinates normalized to
/// the image (x and y in [0,1]; sigma as a fraction of the shorter side).
struct BlobSpec {
  double cx = 0.5;
  double cy = 0.5;
  double sigma = 0.05;
  double amplitude = 0.2;  // peak, as a fraction of full scale
};

struct SyntheticGeometry {
  std::vector<BlobSpec> blobs;
};

// Corpus tuning. Sigma shrinks geometrically with label index so the last
// labels only resolve at fine decompositions.
inline constexpr double kCoarsestSigma = 0.012;
inline constexpr double kFinestSigma = 0.003;
inline constexpr double kCoarseAmplitude = 0.04;
inline constexpr double kFineAmplitude = 0.2;
inline constexpr double kBackgroundLevel = 0.30;
inline constexpr double kNoiseSigma = 0.06;
inline constexpr double kGradientSpan = 0.08;
inline constexpr double kAmplitudeJitter = 0.35;

inline SyntheticGeometry synthetic_geometry(std::uint64_t seed, int n_labels) {
  if (n_labels < 1) fail(ErrorKind::validation, "synthetic geometry needs at least one label");
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  SyntheticGeometry g;
  for (int l = 0; l < n_labels; ++l) {
    const double t = n_labels == 1 ? 0.0 : static_cast<double>(l) / (n_labels - 1);
    BlobSpec b;
    b.sigma = kCoarsestSigma * std::pow(kFinestSigma / kCoarsestSigma, t);
    b.amplitude = kCoarseAmplitude * std::pow(kFineAmplitude / kCoarseAmplitude, t);
    b.cx = rng.uniform(0.15, 0.85);
    b.cy = rng.uniform(0.15, 0.85);
    g.blobs.push_back(b);
  }
  return g;
}

inline std::string synthetic_asset_id(std::size_t i) {
  std::ostringstream os;
  os << "syn" << std::setw(5) << std::setfill('0') << i;
  return os.str();
}

struct SyntheticCorpus {
  std::vector<std::string> asset_ids;
  std::vector<Image> images;
  LabelTable labels;
};

/// 8-bit square images: smooth background, additive noise, and one Gaussian
/// blob per positive label.
inline SyntheticCorpus make_synthetic_corpus(std::size_t n, std::uint32_t size, int n_labels, std::uint64_t seed) {
  if (size < 64) fail(ErrorKind::validation, "synthetic corpus: size must be >= 64");
  if (n < 20) fail(ErrorKind::validation, "synthetic corpus: n must be >= 20");
  const auto geometry = synthetic_geometry(seed, n_labels);
  Rng rng(seed);
  SyntheticCorpus corpus;
  for (int l = 0; l < n_labels; ++l) corpus.labels.label_names.push_back("label" + std::to_string(l));

  const double scale = 255.0;
  const double s = static_cast<double>(size);
  std::vector<double> field(std::size_t(size) * size);
  for (std::size_t i = 0; i < n; ++i) {
    const double level = kBackgroundLevel + rng.uniform(-0.05, 0.05);
    const double gx = rng.uniform(-kGradientSpan, kGradientSpan);
    const double gy = rng.uniform(-kGradientSpan, kGradientSpan);
    for (std::uint32_t y = 0; y < size; ++y) {
      for (std::uint32_t x = 0; x < size; ++x) {
        field[std::size_t(y) * size + x] = level + gx * ((x + 0.5) / s - 0.5) + gy * ((y + 0.5) / s - 0.5);
      }
    }
    LabelRow row{synthetic_asset_id(i), {}};
    for (const auto& blob : geometry.blobs) {
      const bool present = rng.bernoulli(0.5);
      const double amplitude = blob.amplitude * (1.0 + kAmplitudeJitter * rng.uniform(-1.0, 1.0));
      row.values.push_back(present ? 1 : 0);
      if (!present) continue;
      const double sigma_px = blob.sigma * s;
      const double cx = blob.cx * s, cy = blob.cy * s;
      const double reach = 5.0 * sigma_px + 1.0;
      const auto x0 = static_cast<std::uint32_t>(std::max(0.0, std::floor(cx - reach)));
      const auto x1 = static_cast<std::uint32_t>(std::min(s, std::ceil(cx + reach)));
      const auto y0 = static_cast<std::uint32_t>(std::max(0.0, std::floor(cy - reach)));
      const auto y1 = static_cast<std::uint32_t>(std::min(s, std::ceil(cy + reach)));
      const double inv = 1.0 / (2.0 * sigma_px * sigma_px);
      for (std::uint32_t y = y0; y < y1; ++y) {
        for (std::uint32_t x = x0; x < x1; ++x) {
          const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
          field[std::size_t(y) * size + x] += amplitude * std::exp(-(dx * dx + dy * dy) * inv);
        }
      }
    }
    Image img{size, size, 8, std::vector<std::uint16_t>(field.size())};
    for (std::size_t p = 0; p < field.size(); ++p) {
      const double v = (field[p] + kNoiseSigma * rng.normal()) * scale;
      img.pixels[p] = static_cast<std::uint16_t>(std::clamp(std::lround(v), 0l, 255l));
    }
    corpus.asset_ids.push_back(row.asset_id);
    corpus.images.push_back(std::move(img));
    corpus.labels.rows.push_back(std::move(row));
  }
  return corpus;
}

}  // namespace isle
