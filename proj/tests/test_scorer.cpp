#include <gtest/gtest.h>

#include "fixture.hpp"

using namespace isle;

namespace {

ScorerSpec probe(std::uint32_t input, int labels, std::uint64_t seed = 3) {
  ScorerSpec spec;
  spec.input_size = input;
  spec.n_labels = labels;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST(PrepareInput, AreaAverageThenPad) {
  // 4x2 -> input 2: content is 2x1 centered at row 0 (floor of (2-1)/2).
  const Image img{4, 2, 8, {0, 255, 255, 255, 255, 255, 0, 0}};
  const auto x = prepare_input(img, 2);
  ASSERT_EQ(x.size(), 4u);
  EXPECT_DOUBLE_EQ(x[0], 0.75);
  EXPECT_DOUBLE_EQ(x[1], 0.5);
  EXPECT_EQ(x[2], 0.0);
  EXPECT_EQ(x[3], 0.0);
}

TEST(PrepareInput, CentersTallImages) {
  const auto img = test::constant_image(50, 100, 255);
  const auto x = prepare_input(img, 10);
  const auto box = content_box(50, 100, 10);
  EXPECT_EQ(box.width, 5u);
  EXPECT_EQ(box.x0, 2u);
  double total = 0.0;
  for (double v : x) total += v;
  EXPECT_NEAR(total, 50.0, 1e-9);
  EXPECT_EQ(x[0 * 10 + 1], 0.0);
  EXPECT_DOUBLE_EQ(x[0 * 10 + 2], 1.0);
  EXPECT_DOUBLE_EQ(x[9 * 10 + 6], 1.0);
  EXPECT_EQ(x[9 * 10 + 7], 0.0);
}

TEST(PrepareInput, PreservesMeanWhenDownsampling) {
  Rng rng(1);
  const auto img = test::random_image(rng, 97, 97, 16);
  const auto x = prepare_input(img, 13);
  double in = 0.0, out = 0.0;
  for (auto v : img.pixels) in += v;
  for (double v : x) out += v;
  EXPECT_NEAR(out / (13.0 * 13.0), in / (97.0 * 97.0) / 65535.0, 1e-12);
}

TEST(LinearProbe, ZeroImageGivesSigmoidOfBias) {
  const auto spec = probe(32, 4);
  const auto scores = score(spec, test::constant_image(64, 64, 0));
  const auto heads = linear_probe_heads(spec, 64, 64);
  ASSERT_EQ(scores.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(scores[i], sigmoid(heads[i].bias));
}

TEST(LinearProbe, Deterministic) {
  Rng rng(2);
  const auto img = test::random_image(rng, 120, 90, 8);
  const auto spec = probe(48, 3);
  EXPECT_EQ(score(spec, img), score(spec, img));
  Scorer cached(spec);
  EXPECT_EQ(cached(img), score(spec, img));
  EXPECT_EQ(cached(img), cached(img));
  EXPECT_NE(score(probe(48, 3, 4), img), score(spec, img));
}

TEST(LinearProbe, ScoresInUnitInterval) {
  Rng rng(3);
  const auto spec = probe(40, 5);
  for (int i = 0; i < 5; ++i) {
    for (double s : score(spec, test::random_image(rng, 80, 64, 8))) {
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
    }
  }
}

TEST(Precomputed, LooksUpRows) {
  auto table = std::make_shared<ScoreMatrix>(
      read_scores_csv(to_bytes("asset_id,d,a,b\nimg1,0,0.1,0.2\nimg1,3,0.3,0.4\n")));
  EXPECT_EQ(table->label_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(table->size(), 2u);
  ScorerSpec spec;
  spec.kind = ScorerKind::precomputed;
  spec.precomputed = table;
  const auto img = test::constant_image(4, 4, 0);
  EXPECT_EQ(score(spec, img, "img1", 3), (std::vector<double>{0.3, 0.4}));
  EXPECT_THROW(score(spec, img, "img1", 1), Error);
  EXPECT_THROW(score(spec, img, "img2", 0), Error);
}

TEST(Precomputed, RejectsMalformedCsv) {
  EXPECT_THROW(read_scores_csv(to_bytes("asset,d,a\n")), Error);
  EXPECT_THROW(read_scores_csv(to_bytes("asset_id,d,a\nimg1,x,0.5\n")), Error);
  EXPECT_THROW(read_scores_csv(to_bytes("asset_id,d,a\nimg1,0,zz\n")), Error);
  EXPECT_THROW(read_scores_csv(to_bytes("asset_id,d,a\nimg1,0,0.5,0.6\n")), Error);
  ScorerSpec spec;
  spec.kind = ScorerKind::precomputed;
  EXPECT_THROW(validate(spec), Error);
}

TEST(SyntheticCorpus, Deterministic) {
  const auto a = make_synthetic_corpus(100, 64, 3, 99);
  const auto b = make_synthetic_corpus(100, 64, 3, 99);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(write_labels_csv(a.labels), write_labels_csv(b.labels));
  EXPECT_NE(make_synthetic_corpus(20, 64, 3, 98).images[0], a.images[0]);
  EXPECT_THROW(make_synthetic_corpus(19, 64, 1, 1), Error);
  EXPECT_THROW(make_synthetic_corpus(20, 63, 1, 1), Error);
}

TEST(SyntheticCorpus, ProbeSeparatesAtFullResolution) {
  const auto full = test::fixture_auroc(test::fixture().plan.n_levels);
  EXPECT_GE(stats::mean(full), 0.85);
}

TEST(SyntheticCorpus, CoarsestLabelSurvivesFirstDecomposition) {
  EXPECT_GE(test::fixture_auroc(1).front(), 0.8);
}

TEST(SyntheticCorpus, FinestLabelNeedsResolution) {
  const auto full = test::fixture_auroc(test::fixture().plan.n_levels);
  const auto base = test::fixture_auroc(0);
  EXPECT_LT(base.back(), full.back());
  EXPECT_GE(full.back(), 0.8);
  EXPECT_LT(base.back(), 0.65);
}
