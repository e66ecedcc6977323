#include <gtest/gtest.h>

#include "fixture.hpp"

using namespace isle;

namespace {

// Small corpus with precomputed scores so each case controls the AUROCs exactly.
struct Scenario {
  std::vector<AssetStream> streams;
  LabelTable labels;
  DecompositionPlan plan;
  std::shared_ptr<ScoreMatrix> scores = std::make_shared<ScoreMatrix>();

  explicit Scenario(int n_labels, std::size_t n = 24) {
    Rng rng(17);
    for (int l = 0; l < n_labels; ++l) labels.label_names.push_back("l" + std::to_string(l));
    scores->label_names = labels.label_names;
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = "a" + std::to_string(i);
      streams.push_back({id, encode(test::random_image(rng, 256, 256, 8))});
      LabelRow row{id, {}};
      for (int l = 0; l < n_labels; ++l) row.values.push_back((i + static_cast<std::size_t>(l)) % 2 ? 1 : 0);
      labels.rows.push_back(row);
    }
    plan = streams.front().stream.plan();
  }

  /// `noise(d, l)` in [0, 1]: fraction of positives whose score drops below the negatives.
  template <class F>
  void fill(F&& noise) {
    for (std::size_t i = 0; i < streams.size(); ++i) {
      for (int d = 0; d <= plan.n_levels; ++d) {
        std::vector<double> row;
        for (std::size_t l = 0; l < labels.label_names.size(); ++l) {
          const bool positive = labels.rows[i].values[l];
          const double rank = static_cast<double>(i) / static_cast<double>(streams.size());
          const bool flipped = positive && rank < noise(d, static_cast<int>(l));
          row.push_back(positive && !flipped ? 0.9 : 0.1 + 0.01 * rank);
        }
        scores->set(streams[i].asset_id, d, row);
      }
    }
  }

  ScorerSpec spec(std::uint32_t input = 64) const {
    ScorerSpec s;
    s.kind = ScorerKind::precomputed;
    s.input_size = input;
    s.precomputed = scores;
    return s;
  }
};

}  // namespace

TEST(ArchitectureFloor, Examples) {
  const auto plan = plan_decompositions(1024, 1024, 32);
  EXPECT_EQ(architecture_floor(plan, 224), 3);
  EXPECT_EQ(architecture_floor(plan, 256), 3);
  EXPECT_EQ(architecture_floor(plan, 257), 4);
  EXPECT_EQ(architecture_floor(plan, 32), 0);
  EXPECT_EQ(architecture_floor(plan, 1), 0);
  EXPECT_EQ(architecture_floor(plan, 1024), 5);
  EXPECT_THROW(architecture_floor(plan, 1025), Error);
}

TEST(SelectOptimal, IdenticalScoresChooseFloor) {
  Scenario s(3);
  s.fill([](int, int) { return 0.0; });
  const auto report = select_optimal(s.streams, s.labels, s.spec(64), s.plan);
  EXPECT_EQ(report.d_min_architecture, 1);
  EXPECT_EQ(report.chosen_d, 1);
  for (const auto& e : report.per_decomposition) {
    EXPECT_TRUE(e.degenerate);
    EXPECT_EQ(e.t_test.p_value, 1.0);
  }
  EXPECT_EQ(report.reference.mean, 1.0);
}

TEST(SelectOptimal, UniformDropIsDegenerateFailure) {
  Scenario s(3);
  // Identical label columns make every per-label AUROC drop by the same amount.
  for (std::size_t i = 0; i < s.labels.rows.size(); ++i) s.labels.rows[i].values.assign(3, i % 2);
  s.fill([](int d, int) { return d < 3 ? 0.5 : 0.0; });
  const auto report = select_optimal(s.streams, s.labels, s.spec(32), s.plan);
  EXPECT_EQ(report.d_min_architecture, 0);
  EXPECT_TRUE(report.at(0).degenerate);
  EXPECT_EQ(report.at(0).t_test.p_value, 0.0);
  EXPECT_EQ(report.chosen_d, 3);
}

TEST(SelectOptimal, PicksFirstNonSignificantDrop) {
  Scenario s(4);
  // Large drops below d=2, a mixed-sign wobble at d=2.
  s.fill([](int d, int l) {
    if (d < 2) return 0.4 + 0.05 * l;
    if (d == 2) return l % 2 ? 0.1 : 0.0;
    return 0.0;
  });
  const auto report = select_optimal(s.streams, s.labels, s.spec(32), s.plan);
  EXPECT_FALSE(report.at(0).passes);
  EXPECT_FALSE(report.at(1).passes);
  EXPECT_TRUE(report.at(2).passes);
  EXPECT_EQ(report.chosen_d, 2);
  EXPECT_LT(report.at(2).mean_payload_fraction, report.at(3).mean_payload_fraction);
  EXPECT_EQ(report.at(3).mean_payload_fraction, 1.0);
}

TEST(SelectOptimal, SignificanceExtremes) {
  Scenario s(4);
  s.fill([](int d, int l) { return d < 3 ? 0.3 + 0.05 * l : 0.0; });
  EXPECT_EQ(select_optimal(s.streams, s.labels, s.spec(32), s.plan, 1.0).chosen_d, 3);
  EXPECT_EQ(select_optimal(s.streams, s.labels, s.spec(32), s.plan, 0.0).chosen_d, 0);
  EXPECT_THROW(select_optimal(s.streams, s.labels, s.spec(32), s.plan, 1.5), Error);
}

TEST(SelectOptimal, DropsSingleClassLabels) {
  Scenario s(3);
  for (auto& row : s.labels.rows) row.values[1] = 1;
  s.fill([](int, int) { return 0.0; });
  const auto report = select_optimal(s.streams, s.labels, s.spec(), s.plan);
  EXPECT_EQ(report.labels, (std::vector<std::string>{"l0", "l2"}));
  ASSERT_FALSE(report.warnings.empty());
  EXPECT_NE(report.warnings.front().find("l1"), std::string::npos);

  for (auto& row : s.labels.rows) row.values[2] = 0;
  EXPECT_THROW(select_optimal(s.streams, s.labels, s.spec(), s.plan), Error);
}

TEST(SelectOptimal, ValidatesInputs) {
  Scenario s(2);
  s.fill([](int, int) { return 0.0; });
  EXPECT_THROW(select_optimal({}, s.labels, s.spec(), s.plan), Error);
  EXPECT_THROW(select_optimal(s.streams, s.labels, s.spec(512), s.plan), Error);
  auto truncated = s.streams;
  truncated[0].stream = truncate(truncated[0].stream, 1);
  EXPECT_THROW(select_optimal(truncated, s.labels, s.spec(), s.plan), Error);
  auto unlabeled = s.labels;
  unlabeled.rows.pop_back();
  EXPECT_THROW(select_optimal(s.streams, unlabeled, s.spec(), s.plan), Error);
}

TEST(SelectOptimal, JsonReport) {
  Scenario s(3);
  s.fill([](int d, int l) { return d == 0 ? 0.2 * l : 0.0; });
  const auto j = to_json(select_optimal(s.streams, s.labels, s.spec(32), s.plan));
  EXPECT_EQ(j.at("n_levels"), 3);
  EXPECT_EQ(j.at("per_decomposition").size(), 4u);
  EXPECT_TRUE(j.at("per_decomposition")[0].at("p_value").is_number());
  EXPECT_TRUE(j.at("per_decomposition")[3].at("t_statistic").is_null() ||
              Json::parse(j.dump()).at("per_decomposition")[3].at("t_statistic").is_null());
  EXPECT_TRUE(j.contains("chosen_d"));
  EXPECT_EQ(Json::parse(j.dump()).dump(), j.dump());
}

TEST(FrozenFixture, ChoosesRecordedDecomposition) {
  const auto& f = test::fixture();
  const auto a = select_optimal(f.streams, f.corpus.labels, f.spec, f.plan);
  const auto b = select_optimal(f.streams, f.corpus.labels, f.spec, f.plan);
  EXPECT_EQ(a.chosen_d, test::kFixtureChosenD);
  EXPECT_EQ(b.chosen_d, test::kFixtureChosenD);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(a.d_min_architecture, 1);
  EXPECT_GE(a.reference.mean, 0.85);
  EXPECT_FALSE(a.at(1).passes);
}

TEST(FrozenFixture, ThresholdMonotone) {
  const auto& f = test::fixture();
  int previous = -1;
  for (double alpha : {0.001, 0.01, 0.05, 0.2, 1.0}) {
    const int chosen = select_optimal(f.streams, f.corpus.labels, f.spec, f.plan, alpha).chosen_d;
    EXPECT_GE(chosen, previous) << "significance " << alpha;
    previous = chosen;
  }
}
