#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "support.hpp"
#include "vcasir/disparity.hpp"

using namespace vcasir;

namespace {

BlockMatchParams range(int lo, int hi, int rad = 4) { return {rad, lo, hi, false}; }

}  // namespace

TEST(CandidateOrder, SmallestMagnitudeNegativeFirst) {
  EXPECT_EQ(detail::candidate_order(-2, 3), (std::vector<int>{0, -1, 1, -2, 2, 3}));
  EXPECT_EQ(detail::candidate_order(2, 4), (std::vector<int>{2, 3, 4}));
}

TEST(BlockMatch, IdenticalViewsGiveZero) {
  const GrayImage img = test::random_texture(24, 20, 1);
  const auto d = estimate_disparity(StereoPair(img, img), range(-8, 8));
  for (double v : d.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(BlockMatch, ConstantViewsGiveZero) {
  const GrayImage img = test::constant_image(24, 20, 90.0);
  const auto d = estimate_disparity(StereoPair(img, img), range(-8, 8));
  for (double v : d.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(BlockMatch, RightShiftGivesNegativeDisparity) {
  const GrayImage left = test::random_texture(48, 24, 2);
  const GrayImage right = test::shift_right(left, 5);
  const auto d = estimate_disparity(StereoPair(left, right), range(-12, 12));
  for (int r = 4; r < 20; ++r)
    for (int c = 14; c < 40; ++c) EXPECT_EQ(d(r, c), -5.0) << r << "," << c;
}

TEST(BlockMatch, TranslationConsistency) {
  const GrayImage left = test::random_texture(48, 20, 3);
  for (int k : {-3, 0, 2, 6}) {
    const auto d = estimate_disparity(StereoPair(left, test::shift_right(left, k)), range(-10, 10));
    for (int r = 4; r < 16; ++r)
      for (int c = 16; c < 32; ++c) EXPECT_EQ(d(r, c), -k);
  }
}

TEST(BlockMatch, MatchesBruteForceOracle) {
  for (std::uint32_t seed = 0; seed < 6; ++seed) {
    // Low-contrast textures produce plenty of exact SAD ties.
    std::mt19937 gen(seed);
    std::uniform_int_distribution<int> lv(0, 2);
    const auto left = GrayImage::generate(14, 11, [&](int, int) { return lv(gen); });
    const auto right = GrayImage::generate(14, 11, [&](int, int) { return lv(gen); });
    const int rad = 1 + static_cast<int>(seed % 3);
    const auto got = estimate_disparity(StereoPair(left, right), range(-5, 4, rad));
    const auto want = oracle::block_match(left, right, rad, -5, 4);
    for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(got.pixels()[i], want[i]) << "seed " << seed << " i " << i;
  }
}

TEST(BlockMatch, OutputWithinSearchRange) {
  const auto left = test::random_texture(30, 15, 4);
  const auto right = test::random_texture(30, 15, 5);
  BlockMatchParams p = range(-3, 7, 2);
  p.subpixel = true;
  const auto d = estimate_disparity(StereoPair(left, right), p);
  for (double v : d.pixels()) {
    EXPECT_GE(v, -3.0);
    EXPECT_LE(v, 7.0);
  }
}

TEST(BlockMatch, SubpixelRecoversFractionalShift) {
  // Linear ramp shifted by 2.5 px: parabola through the SAD minimum lands near -2.5.
  const auto left = GrayImage::generate(40, 12, [](int, int c) { return 4.0 * c + 20.0; });
  const auto right = GrayImage::generate(40, 12, [](int, int c) { return 4.0 * (c - 2.5) + 20.0; });
  BlockMatchParams p = range(-6, 6, 2);
  p.subpixel = true;
  const auto d = estimate_disparity(StereoPair(left, right), p);
  EXPECT_NEAR(d(6, 20), -2.5, 0.26);
  p.subpixel = false;
  const double integer = estimate_disparity(StereoPair(left, right), p)(6, 20);
  EXPECT_EQ(integer, std::round(integer));
}

TEST(BlockMatch, Errors) {
  const GrayImage img = test::random_texture(20, 20, 6);
  const StereoPair pair(img, img);
  EXPECT_THROW(estimate_disparity(pair, range(-20, 5)), ParameterError);
  EXPECT_THROW(estimate_disparity(pair, range(3, 3)), ParameterError);
  EXPECT_THROW(estimate_disparity(pair, range(-2, 2, 0)), ParameterError);
  const GrayImage tiny = test::random_texture(8, 8, 7);
  EXPECT_THROW(estimate_disparity(StereoPair(tiny, tiny), range(-2, 2)), DimensionError);
}

TEST(BlockMatch, Deterministic) {
  const auto left = test::random_texture(32, 16, 8);
  const auto right = test::random_texture(32, 16, 9);
  const StereoPair pair(left, right);
  EXPECT_EQ(estimate_disparity(pair, range(-6, 6)), estimate_disparity(pair, range(-6, 6)));
}

TEST(ComfortZone, TrigonometricCase) {
  const double want = 2.0 * 1000.0 * std::tan(0.5 * std::numbers::pi / 180.0) * 3.0;
  EXPECT_NEAR(comfort_zone_pixels(1.0, {1000.0, 3.0}), want, 1e-12);
  EXPECT_NEAR(want, 52.36, 0.005);
}

TEST(ComfortZone, BackSolvedGeometryGivesDefaultZone) {
  const double density = 79.55 / (2.0 * 1000.0 * std::tan(0.5 * std::numbers::pi / 180.0));
  EXPECT_NEAR(comfort_zone_pixels(1.0, {1000.0, density}), 79.55, 1e-9);
}

TEST(ComfortZone, MonotoneAndVanishing) {
  const ViewingGeometry g{800.0, 2.0};
  EXPECT_LT(comfort_zone_pixels(1e-9, g), 1e-6);
  EXPECT_LT(comfort_zone_pixels(0.5, g), comfort_zone_pixels(0.6, g));
  EXPECT_LT(comfort_zone_pixels(1.0, {700.0, 2.0}), comfort_zone_pixels(1.0, g));
  EXPECT_LT(comfort_zone_pixels(1.0, {800.0, 1.5}), comfort_zone_pixels(1.0, g));
}

TEST(ComfortZone, Errors) {
  EXPECT_THROW(comfort_zone_pixels(1.0, {0.0, 1.0}), ParameterError);
  EXPECT_THROW(comfort_zone_pixels(1.0, {100.0, -1.0}), ParameterError);
  EXPECT_THROW(comfort_zone_pixels(0.0, {100.0, 1.0}), ParameterError);
  EXPECT_THROW(comfort_zone_pixels(10.0, {100.0, 1.0}), ParameterError);
}
