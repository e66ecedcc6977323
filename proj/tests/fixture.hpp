#pragma once

#include "support.hpp"

namespace isle::test {

// Frozen optimizer fixture: 200 images of 512x512, 8 labels, corpus seed 7,
// linear probe with a 64-pixel input.
inline constexpr std::size_t kFixtureImages = 200;
inline constexpr std::uint32_t kFixtureSize = 512;
inline constexpr int kFixtureLabels = 8;
inline constexpr std::uint64_t kFixtureSeed = 7;
inline constexpr std::uint32_t kFixtureInput = 64;
inline constexpr int kFixtureChosenD = 2;

struct Fixture {
  SyntheticCorpus corpus;
  std::vector<AssetStream> streams;
  DecompositionPlan plan;
  ScorerSpec spec;
};

inline const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture f;
    f.corpus = make_synthetic_corpus(kFixtureImages, kFixtureSize, kFixtureLabels, kFixtureSeed);
    for (std::size_t i = 0; i < f.corpus.images.size(); ++i) {
      f.streams.push_back({f.corpus.asset_ids[i], encode(f.corpus.images[i])});
    }
    f.plan = f.streams.front().stream.plan();
    f.spec.input_size = kFixtureInput;
    f.spec.seed = kFixtureSeed;
    f.spec.n_labels = kFixtureLabels;
    return f;
  }();
  return f;
}

/// Per-label AUROC of the linear probe on the fixture decoded at `d`.
inline std::vector<double> fixture_auroc(int d) {
  const auto& f = fixture();
  Scorer scorer(f.spec);
  std::vector<std::vector<double>> scores;
  for (const auto& s : f.streams) scores.push_back(scorer(decode_partial(s.stream, d)));
  std::vector<double> out;
  for (int l = 0; l < kFixtureLabels; ++l) {
    std::vector<double> col;
    std::vector<std::uint8_t> truth;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      col.push_back(scores[i][static_cast<std::size_t>(l)]);
      truth.push_back(f.corpus.labels.rows[i].values[static_cast<std::size_t>(l)]);
    }
    out.push_back(stats::auroc(col, truth));
  }
  return out;
}

}  // namespace isle::test
