#include <gtest/gtest.h>

#include "support.hpp"

using namespace isle;

namespace {

// Straight from the lifting formulas on an explicitly mirrored copy.
std::pair<std::vector<Coeff>, std::vector<Coeff>> naive_forward(const std::vector<Coeff>& x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n == 1) return {x, {}};
  auto ext = [&](std::ptrdiff_t i) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return x[static_cast<std::size_t>(i)];
  };
  auto floor_div = [](Coeff a, Coeff b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
  auto d = [&](std::ptrdiff_t i) { return ext(2 * i + 1) - floor_div(ext(2 * i) + ext(2 * i + 2), 2); };
  std::vector<Coeff> low, high;
  for (std::ptrdiff_t i = 0; 2 * i + 1 < n; ++i) high.push_back(d(i));
  for (std::ptrdiff_t i = 0; 2 * i < n; ++i) low.push_back(ext(2 * i) + floor_div(d(i - 1) + d(i) + 2, 4));
  return {low, high};
}

std::vector<Coeff> random_signal(Rng& rng, std::size_t n) {
  std::vector<Coeff> x(n);
  const double span = rng.bernoulli(0.5) ? 255.0 : 65535.0;
  for (auto& v : x) v = static_cast<Coeff>(std::floor(rng.uniform(-span, span)));
  return x;
}

}  // namespace

TEST(Lifting, ConstantSignalHasZeroDetail) {
  const std::vector<Coeff> x{7, 7, 7, 7};
  const auto [low, high] = forward_1d(x);
  EXPECT_EQ(low, (std::vector<Coeff>{7, 7}));
  EXPECT_EQ(high, (std::vector<Coeff>{0, 0}));
  EXPECT_EQ(inverse_1d(low, high), x);
}

TEST(Lifting, SingleSamplePassesThrough) {
  const std::vector<Coeff> x{5};
  const auto [low, high] = forward_1d(x);
  EXPECT_EQ(low, x);
  EXPECT_TRUE(high.empty());
  EXPECT_EQ(inverse_1d(low, high), x);
}

TEST(Lifting, RejectsBadLengths) {
  EXPECT_THROW(forward_1d(std::vector<Coeff>{}), Error);
  EXPECT_THROW(inverse_1d(std::vector<Coeff>{1}, std::vector<Coeff>{1, 2}), Error);
  EXPECT_THROW(inverse_1d(std::vector<Coeff>{1, 2, 3}, std::vector<Coeff>{1}), Error);
  EXPECT_THROW(inverse_1d(std::vector<Coeff>{}, std::vector<Coeff>{}), Error);
}

TEST(Lifting, MatchesNaiveFormulas) {
  Rng rng(3);
  for (std::size_t n = 1; n <= 65; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = random_signal(rng, n);
      EXPECT_EQ(forward_1d(x), naive_forward(x)) << "n=" << n;
    }
  }
}

TEST(Lifting, RoundTripsTenThousandSignals) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const auto n = static_cast<std::size_t>(1 + i % 65);
    const auto x = random_signal(rng, n);
    const auto [low, high] = forward_1d(x);
    ASSERT_EQ(low.size(), (n + 1) / 2);
    ASSERT_EQ(high.size(), n / 2);
    ASSERT_EQ(inverse_1d(low, high), x) << "n=" << n;
  }
}

TEST(Pyramid2d, ConstantImageHasZeroDetails) {
  const auto img = test::constant_image(8, 8, 99);
  const auto pyr = forward_2d(img, 3);
  EXPECT_EQ(pyr.base_ll.plane.width, 1u);
  EXPECT_EQ(pyr.base_ll.plane.height, 1u);
  EXPECT_EQ(pyr.base_ll.plane.samples[0], 99);
  for (const auto& g : pyr.details) {
    for (const auto* band : {&g.hl, &g.lh, &g.hh}) {
      EXPECT_TRUE(std::all_of(band->plane.samples.begin(), band->plane.samples.end(), [](Coeff c) { return c == 0; }));
    }
  }
}

TEST(Pyramid2d, Ladder256) {
  Rng rng(8);
  const auto img = test::random_image(rng, 256, 256, 8);
  const auto pyr = forward_2d(img, 3);
  EXPECT_EQ(pyr.base_ll.plane.width, 32u);
  EXPECT_EQ(inverse_2d(pyr, 1).width, 64u);
  EXPECT_EQ(inverse_2d(pyr, 2).width, 128u);
  EXPECT_EQ(inverse_2d(pyr, 3).width, 256u);
  EXPECT_EQ(inverse_2d(pyr, 0), pyr.base_ll.plane);
}

TEST(Pyramid2d, BandsTileParent) {
  Rng rng(9);
  const auto img = test::random_image(rng, 37, 21, 8);
  const auto pyr = forward_2d(img, 4);
  std::uint32_t w = 37, h = 21;
  for (int level = 1; level <= 4; ++level) {
    const auto& g = pyr.level(level);
    const std::uint32_t ll_w = ceil_half(w), ll_h = ceil_half(h);
    EXPECT_EQ(ll_w + g.hl.plane.width, w);
    EXPECT_EQ(ll_h + g.lh.plane.height, h);
    EXPECT_EQ(g.hh.plane.width, g.hl.plane.width);
    EXPECT_EQ(g.hh.plane.height, g.lh.plane.height);
    EXPECT_EQ(g.hl.plane.height, ll_h);
    w = ll_w;
    h = ll_h;
  }
  EXPECT_EQ(pyr.base_ll.plane.width, w);
  EXPECT_EQ(pyr.base_ll.plane.height, h);
}

TEST(Pyramid2d, RoundTripsOddSizesBothDepths) {
  Rng rng(12);
  for (std::uint32_t w = 1; w <= 65; w += 4) {
    for (std::uint32_t h = 2; h <= 65; h += 7) {
      const auto img = test::random_image(rng, w, h, (w + h) % 2 ? 16 : 8);
      const int levels = max_levels(w, h);
      if (levels == 0) continue;
      const auto pyr = forward_2d(img, levels);
      ASSERT_EQ(materialize(inverse_2d(pyr, levels), img.bit_depth), img) << w << "x" << h;
    }
  }
}

TEST(Pyramid2d, PartialReconstructionMatchesShallowTransform) {
  Rng rng(13);
  for (int i = 0; i < 10; ++i) {
    const auto w = static_cast<std::uint32_t>(16 + rng.uniform() * 80);
    const auto h = static_cast<std::uint32_t>(16 + rng.uniform() * 80);
    const auto img = test::random_image(rng, w, h, 16);
    const int n = 4;
    const auto pyr = forward_2d(img, n);
    for (int d = 0; d < n; ++d) {
      EXPECT_EQ(inverse_2d(pyr, d), forward_2d(img, n - d).base_ll.plane) << "d=" << d;
    }
  }
}

TEST(Pyramid2d, RejectsBadLevels) {
  const auto img = test::constant_image(4, 4, 1);
  EXPECT_THROW(forward_2d(img, 0), Error);
  EXPECT_THROW(forward_2d(img, 3), Error);
  EXPECT_NO_THROW(forward_2d(img, 2));
  const auto pyr = forward_2d(img, 2);
  try {
    inverse_2d(pyr, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::range);
  }
  EXPECT_THROW(inverse_2d(pyr, -1), Error);
}

TEST(Pyramid2d, MaterializeClamps) {
  const Plane p{3, 1, {-5, 128, 300}};
  const auto img = materialize(p, 8);
  EXPECT_EQ(img.pixels, (std::vector<std::uint16_t>{0, 128, 255}));
}
