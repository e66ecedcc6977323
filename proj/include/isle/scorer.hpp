#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "isle/bytes.hpp"
#include "isle/error.hpp"
#include "isle/image.hpp"
#include "isle/synthetic.hpp"

namespace isle {

/// Per-asset, per-decomposition label scores supplied by an external model.
class ScoreMatrix {
 public:
  std::vector<std::string> label_names;

  void set(const std::string& asset_id, int d, std::vector<double> scores) {
    if (!label_names.empty() && scores.size() != label_names.size()) {
      fail(ErrorKind::validation, "score row for " + asset_id + " has the wrong label count");
    }
    rows_[{asset_id, d}] = std::move(scores);
  }

  const std::vector<double>& get(const std::string& asset_id, int d) const {
    auto it = rows_.find({asset_id, d});
    if (it == rows_.end()) {
      fail(ErrorKind::validation, "no precomputed scores for asset " + asset_id + " at d=" + std::to_string(d));
    }
    return it->second;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  std::map<std::pair<std::string, int>, std::vector<double>> rows_;
};

/// Parses "asset_id,d,<label1>,...": one row per (asset, decomposition).
inline ScoreMatrix read_scores_csv(ByteView data) {
  const std::string_view text(reinterpret_cast<const char*>(data.data()), data.size());
  const auto rows = detail::parse_csv(text);
  if (rows.empty() || rows[0].size() < 3 || rows[0][0] != "asset_id" || rows[0][1] != "d") {
    fail(ErrorKind::validation, "scores CSV header must be asset_id,d,<label>,...");
  }
  ScoreMatrix m;
  m.label_names.assign(rows[0].begin() + 2, rows[0].end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const auto line = std::to_string(r + 1);
    if (cells.size() != rows[0].size()) fail(ErrorKind::validation, "ragged scores CSV row at line " + line);
    if (!is_valid_asset_id(cells[0])) fail(ErrorKind::validation, "invalid asset_id at line " + line);
    std::vector<double> scores;
    int d = 0;
    try {
      std::size_t used = 0;
      d = std::stoi(cells[1], &used);
      if (used != cells[1].size() || d < 0) throw std::invalid_argument("d");
      for (std::size_t c = 2; c < cells.size(); ++c) {
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size() || !std::isfinite(v)) throw std::invalid_argument("score");
        scores.push_back(v);
      }
    } catch (const std::logic_error&) {
      fail(ErrorKind::validation, "unparseable number in scores CSV at line " + line);
    }
    m.set(cells[0], d, std::move(scores));
  }
  return m;
}

enum class ScorerKind { linear_probe, precomputed };

struct ScorerSpec {
  ScorerKind kind = ScorerKind::linear_probe;
  std::uint32_t input_size = 224;  // model's square input
  std::uint64_t seed = 0;          // linear_probe: shared with the synthetic corpus geometry
  int n_labels = 1;                // linear_probe: number of heads
  std::shared_ptr<const ScoreMatrix> precomputed;
};

inline void validate(const ScorerSpec& spec) {
  if (spec.input_size < 1) fail(ErrorKind::validation, "scorer input_size must be >= 1");
  if (spec.kind == ScorerKind::linear_probe && spec.n_labels < 1) {
    fail(ErrorKind::validation, "linear probe needs at least one head");
  }
  if (spec.kind == ScorerKind::precomputed && !spec.precomputed) {
    fail(ErrorKind::validation, "precomputed scorer has no score table");
  }
}

// ---------------------------------------------------------------------------
// Model-input preparation

/// Where the resized image sits inside the zero-padded square.
struct ContentBox {
  std::uint32_t x0 = 0, y0 = 0, width = 0, height = 0;
};

inline ContentBox content_box(std::uint32_t width, std::uint32_t height, std::uint32_t input_size) {
  const double scale = static_cast<double>(input_size) / std::max(width, height);
  ContentBox box;
  box.width = std::clamp<std::uint32_t>(static_cast<std::uint32_t>(std::lround(width * scale)), 1, input_size);
  box.height = std::clamp<std::uint32_t>(static_cast<std::uint32_t>(std::lround(height * scale)), 1, input_size);
  box.x0 = (input_size - box.width) / 2;
  box.y0 = (input_size - box.height) / 2;
  return box;
}

namespace detail {

struct AxisWeight {
  std::uint32_t src;
  double weight;
};

/// Overlap of each output cell [o, o+1) * src/out with the source samples.
inline std::vector<std::vector<AxisWeight>> area_weights(std::uint32_t src, std::uint32_t out) {
  std::vector<std::vector<AxisWeight>> w(out);
  const double ratio = static_cast<double>(src) / out;
  for (std::uint32_t o = 0; o < out; ++o) {
    const double lo = o * ratio, hi = (o + 1) * ratio;
    for (auto s = static_cast<std::uint32_t>(std::floor(lo)); s < src && s < hi; ++s) {
      const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (overlap > 0) w[o].push_back({s, overlap / ratio});
    }
  }
  return w;
}

}  // namespace detail

/// Area-averages `img` so its longer side equals `input_size`, scales samples
/// to [0,1], then zero-pads to a centered input_size x input_size square.
inline std::vector<double> prepare_input(const Image& img, std::uint32_t input_size) {
  validate(img);
  const auto box = content_box(img.width, img.height, input_size);
  const auto wx = detail::area_weights(img.width, box.width);
  const auto wy = detail::area_weights(img.height, box.height);
  const double norm = 1.0 / img.max_value();

  std::vector<double> rows(std::size_t(box.width) * img.height);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    for (std::uint32_t ox = 0; ox < box.width; ++ox) {
      double acc = 0.0;
      for (const auto& [sx, w] : wx[ox]) acc += w * img.at(sx, y);
      rows[std::size_t(y) * box.width + ox] = acc;
    }
  }
  std::vector<double> out(std::size_t(input_size) * input_size, 0.0);
  for (std::uint32_t oy = 0; oy < box.height; ++oy) {
    for (std::uint32_t ox = 0; ox < box.width; ++ox) {
      double acc = 0.0;
      for (const auto& [sy, w] : wy[oy]) acc += w * rows[std::size_t(sy) * box.width + ox];
      out[std::size_t(box.y0 + oy) * input_size + box.x0 + ox] = acc * norm;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear probe

struct LinearHead {
  std::vector<double> weights;
  double gain = 1.0;
  double bias = 0.0;  // logit = gain * <weights, x> + bias
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Heads are matched filters for the seeded blob geometry, rendered at model
/// resolution for an image of the given aspect. Each head's response is
/// calibrated to read the blob amplitude; the logit is centered at half the
/// nominal amplitude.
inline std::vector<LinearHead> linear_probe_heads(const ScorerSpec& spec, std::uint32_t width, std::uint32_t height) {
  const auto geometry = synthetic_geometry(spec.seed, spec.n_labels);
  const auto box = content_box(width, height, spec.input_size);
  const double shorter = std::min(width, height);
  const std::size_t size = std::size_t(spec.input_size) * spec.input_size;
  auto cell_mass = [](double lo, double hi, double center, double sigma) {
    const double k = 1.0 / (std::numbers::sqrt2 * sigma);
    return 0.5 * (std::erf((hi - center) * k) - std::erf((lo - center) * k)) / (hi - lo);
  };

  std::vector<LinearHead> heads;
  for (const auto& blob : geometry.blobs) {
    // Blob extent in content-box pixels along each axis.
    const double sx = blob.sigma * shorter / width * box.width;
    const double sy = blob.sigma * shorter / height * box.height;
    const double cx = blob.cx * box.width, cy = blob.cy * box.height;
    std::vector<double> tx(box.width), ty(box.height);
    for (std::uint32_t x = 0; x < box.width; ++x) tx[x] = cell_mass(x, x + 1.0, cx, sx);
    for (std::uint32_t y = 0; y < box.height; ++y) ty[y] = cell_mass(y, y + 1.0, cy, sy);
    // Peak normalization: the continuous blob integrates to 2*pi*sx*sy.
    const double peak = 2.0 * std::numbers::pi * sx * sy;

    std::vector<double> templ(size, 0.0);
    double sum = 0.0;
    for (std::uint32_t y = 0; y < box.height; ++y) {
      for (std::uint32_t x = 0; x < box.width; ++x) {
        const double v = tx[x] * ty[y] * peak;
        templ[std::size_t(box.y0 + y) * spec.input_size + box.x0 + x] = v;
        sum += v;
      }
    }
    const double mean = sum / static_cast<double>(size);
    LinearHead head;
    head.weights.resize(size);
    double response = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      head.weights[i] = templ[i] - mean;
      response += head.weights[i] * templ[i];
    }
    for (auto& w : head.weights) w /= response;
    head.gain = 8.0 / blob.amplitude;
    head.bias = -0.5 * blob.amplitude * head.gain;
    heads.push_back(std::move(head));
  }
  return heads;
}

inline std::vector<double> apply_heads(const std::vector<LinearHead>& heads, std::span<const double> input) {
  std::vector<double> scores;
  scores.reserve(heads.size());
  for (const auto& head : heads) {
    double acc = 0.0;
    for (std::size_t i = 0; i < input.size(); ++i) acc += head.weights[i] * input[i];
    scores.push_back(sigmoid(head.gain * acc + head.bias));
  }
  return scores;
}

/// Per-label scores in [0,1]. `asset_id` and `d` key the precomputed table and
/// are ignored by the linear probe.
inline std::vector<double> score(const ScorerSpec& spec, const Image& img, const std::string& asset_id = {},
                                 int d = 0) {
  validate(spec);
  if (spec.kind == ScorerKind::precomputed) return spec.precomputed->get(asset_id, d);
  const auto heads = linear_probe_heads(spec, img.width, img.height);
  return apply_heads(heads, prepare_input(img, spec.input_size));
}

/// Caches linear-probe heads per image shape for repeated scoring.
class Scorer {
 public:
  explicit Scorer(ScorerSpec spec) : spec_(std::move(spec)) { validate(spec_); }

  const ScorerSpec& spec() const { return spec_; }

  std::vector<double> operator()(const Image& img, const std::string& asset_id = {}, int d = 0) {
    if (spec_.kind == ScorerKind::precomputed) return spec_.precomputed->get(asset_id, d);
    auto key = std::make_pair(img.width, img.height);
    auto it = heads_.find(key);
    if (it == heads_.end()) it = heads_.emplace(key, linear_probe_heads(spec_, img.width, img.height)).first;
    return apply_heads(it->second, prepare_input(img, spec_.input_size));
  }

 private:
  ScorerSpec spec_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<LinearHead>> heads_;
};

}  // namespace isle
