#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "support.hpp"
#include "vcasir/retarget.hpp"
#include "vcasir/rng.hpp"
#include "vcasir/synth.hpp"

using namespace vcasir;

namespace {

EnergyMap random_energy(std::mt19937& gen, int w, int h, int levels) {
  std::uniform_int_distribution<int> dist(0, levels);
  return EnergyMap::generate(w, h, [&](int, int) { return dist(gen); });
}

std::vector<std::vector<double>> rows_of(const EnergyMap& e) {
  std::vector<std::vector<double>> out;
  for (int r = 0; r < e.height(); ++r) out.emplace_back(e.row(r).begin(), e.row(r).end());
  return out;
}

StereoPair textured_pair(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  return synthetic_scene(rng, w, h);
}

}  // namespace

TEST(GradientEnergy, StepAndConstant) {
  const auto flat = gradient_energy(GrayImage(5, 4, 9.0));
  for (double v : flat.pixels()) EXPECT_EQ(v, 0.0);
  const auto step = GrayImage::generate(6, 5, [](int, int c) { return c >= 3 ? 70.0 : 20.0; });
  const auto e = gradient_energy(step);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) EXPECT_EQ(e(r, c), c == 2 ? 50.0 : 0.0);
  EXPECT_THROW(gradient_energy(GrayImage(1, 4, 0.0)), DimensionError);
}

TEST(Seam, ZeroColumnIsChosen) {
  for (int k = 0; k < 5; ++k) {
    const auto e = EnergyMap::generate(5, 5, [&](int r, int c) { return c == k ? 0.0 : 1.0 + r + c; });
    const Seam s = find_vertical_seam(e);
    EXPECT_EQ(s.columns, std::vector<int>(5, k));
    EXPECT_EQ(oracle::exhaustive_seam(rows_of(e)).columns, s.columns);
  }
}

TEST(Seam, UniformEnergyGoesLeft) {
  EXPECT_EQ(find_vertical_seam(EnergyMap(7, 4, 2.0)).columns, std::vector<int>(4, 0));
}

TEST(Seam, MatchesExhaustiveSearchWithTies) {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 150; ++trial) {
    const int w = 3 + trial % 4, h = 2 + trial % 5;
    const auto e = random_energy(gen, w, h, trial % 2 ? 2 : 50);
    const Seam s = find_vertical_seam(e);
    const auto want = oracle::exhaustive_seam(rows_of(e));
    ASSERT_TRUE(s.connected());
    double cost = 0.0;
    for (int r = 0; r < h; ++r) cost += e(r, s.columns[static_cast<std::size_t>(r)]);
    ASSERT_EQ(cost, want.cost) << "trial " << trial;
    ASSERT_EQ(s.columns, want.columns) << "trial " << trial;
  }
}

TEST(Seam, TooNarrow) { EXPECT_THROW(find_vertical_seam(EnergyMap(2, 3, 0.0)), DimensionError); }

TEST(SeamCarve, WidthsAndDepthPreservation) {
  const StereoPair p = textured_pair(30, 12, 1);
  const auto& d = *p.disparity();
  const StereoPair out = stereo_seam_carve(p, d, 7);
  EXPECT_EQ(out.width(), 23);
  EXPECT_EQ(out.disparity()->width(), 23);
  std::vector<double> before(d.pixels().begin(), d.pixels().end()), after(out.disparity()->pixels().begin(),
                                                                           out.disparity()->pixels().end());
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  EXPECT_TRUE(std::includes(before.begin(), before.end(), after.begin(), after.end()));
  // Row order is kept: every output row is a subsequence of its input row.
  for (int r = 0; r < 12; ++r) {
    const auto in = d.row(r);
    const auto o = out.disparity()->row(r);
    std::size_t j = 0;
    for (std::size_t i = 0; i < in.size() && j < o.size(); ++i)
      if (in[i] == o[j]) ++j;
    EXPECT_EQ(j, o.size()) << "row " << r;
  }
}

TEST(SeamCarve, ZeroDisparityRemovesSameColumns) {
  const GrayImage left = test::random_texture(12, 6, 2);
  const GrayImage right = GrayImage::generate(12, 6, [&](int r, int c) { return 255.0 - left(r, c); });
  const DisparityMap zero(12, 6, 0.0);
  const StereoPair out = stereo_seam_carve(StereoPair(left, right), zero, 1);
  const Seam s = find_vertical_seam(EnergyMap::generate(12, 6, [&](int r, int c) {
    return gradient_energy(left)(r, c) + gradient_energy(right)(r, c);
  }));
  const GrayImage want_right = detail::remove_per_row(right, s.columns);
  EXPECT_EQ(out.right(), want_right);
  EXPECT_EQ(out.left(), detail::remove_per_row(left, s.columns));
}

TEST(SeamCarve, Errors) {
  const StereoPair p = textured_pair(10, 6, 3);
  EXPECT_THROW(stereo_seam_carve(p, *p.disparity(), 8), ParameterError);
  EXPECT_THROW(stereo_seam_carve(p, *p.disparity(), -1), ParameterError);
  EXPECT_THROW(stereo_seam_carve(p, *p.disparity(), 2, -1.0), ParameterError);
  EXPECT_THROW(stereo_seam_carve(p, DisparityMap(9, 6, 0.0), 2), DimensionError);
}

TEST(Crop, OffsetBookkeeping) {
  const StereoPair p = textured_pair(40, 8, 4);
  const DisparityMap d(40, 8, 20.0);
  const StereoPair out = stereo_crop(p, d, 28, 10, 4);
  for (double v : out.disparity()->pixels()) EXPECT_EQ(v, 14.0);
  EXPECT_EQ(out.left()(3, 0), p.left()(3, 10));
  EXPECT_EQ(out.right()(3, 0), p.right()(3, 4));
}

TEST(Crop, EqualOffsetsPreserveDisparity) {
  const StereoPair p = textured_pair(40, 8, 5);
  const StereoPair out = stereo_crop(p, *p.disparity(), 28, 6, 6);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 28; ++c) EXPECT_EQ((*out.disparity())(r, c), (*p.disparity())(r, c + 6));
}

TEST(Crop, IdentityAndErrors) {
  const StereoPair p = textured_pair(16, 8, 6);
  const StereoPair same = stereo_crop(p, *p.disparity(), 16, 0, 0);
  EXPECT_EQ(same.left(), p.left());
  EXPECT_EQ(*same.disparity(), *p.disparity());
  EXPECT_THROW(stereo_crop(p, *p.disparity(), 10, 7, 0), ParameterError);
  EXPECT_THROW(stereo_crop(p, *p.disparity(), 0, 0, 0), ParameterError);
}

TEST(Scale, ExactSevenTenths) {
  for (int w : {60, 70}) {
    const StereoPair p = textured_pair(w, 6, 7);
    const DisparityMap d(w, 6, 20.0);
    const StereoPair out = stereo_scale(p, d, w * 7 / 10);
    for (double v : out.disparity()->pixels()) EXPECT_EQ(v, 14.0);
  }
}

TEST(Scale, IdentityAndPixelCentres) {
  const StereoPair p = textured_pair(20, 5, 8);
  const StereoPair same = stereo_scale(p, *p.disparity(), 20);
  EXPECT_EQ(same.left(), p.left());
  EXPECT_EQ(*same.disparity(), *p.disparity());

  const auto ramp = GrayImage::generate(4, 1, [](int, int c) { return 10.0 * c; });
  const auto half = detail::resample_columns(ramp, 2);
  // Centres map to source x = 0.5 and 2.5.
  EXPECT_DOUBLE_EQ(half(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(half(0, 1), 25.0);
}

TEST(Scale, MaxMagnitudeScales) {
  const StereoPair p = textured_pair(50, 6, 9);
  const DisparityMap d(50, 6, -33.0);
  const StereoPair out = stereo_scale(p, d, 35);
  const double s = 35.0 / 50.0;
  for (double v : out.disparity()->pixels()) EXPECT_NEAR(v, -33.0 * s, 1e-6);
}

TEST(Multi, ConstantBlocksCrop) {
  const GrayImage v(80, 6, 100.0);
  const DisparityMap d(80, 6, 12.0);
  const auto res = stereo_multi_operator(StereoPair(v, v), d, 56);
  for (auto op : res.block_ops) EXPECT_EQ(op, RetargetOperator::Crop);
  const StereoPair crop = stereo_crop(StereoPair(v, v), d, 56, 12, 12);
  EXPECT_EQ(res.pair.left(), crop.left());
  EXPECT_EQ(*res.pair.disparity(), *crop.disparity());
}

TEST(Multi, ExactWidthAndDepthNeutralBlocks) {
  for (int w : {64, 80, 100, 37}) {
    const StereoPair p = textured_pair(w, 10, static_cast<std::uint64_t>(w));
    const int target = static_cast<int>(std::lround(0.7 * w));
    const auto res = stereo_multi_operator(p, *p.disparity(), target, 36);
    EXPECT_EQ(res.pair.width(), target);
    EXPECT_EQ(res.pair.disparity()->width(), target);
    const bool no_scale = std::none_of(res.block_ops.begin(), res.block_ops.end(),
                                       [](RetargetOperator o) { return o == RetargetOperator::Scale; });
    if (no_scale) {
      std::set<double> original(p.disparity()->pixels().begin(), p.disparity()->pixels().end());
      for (double v : res.pair.disparity()->pixels()) EXPECT_TRUE(original.count(v));
    }
  }
}

TEST(Multi, Errors) {
  const StereoPair p = textured_pair(20, 6, 10);
  EXPECT_THROW(stereo_multi_operator(p, *p.disparity(), 14, 2), ParameterError);
  EXPECT_THROW(stereo_multi_operator(p, *p.disparity(), 21), ParameterError);
  EXPECT_THROW(stereo_multi_operator(p, *p.disparity(), 14, 36, -0.5), ParameterError);
}

TEST(Retarget, AllOperatorsHitTargetWidth) {
  const StereoPair p = textured_pair(64, 48, 11);
  for (auto op : {RetargetOperator::Crop, RetargetOperator::Scale, RetargetOperator::Seam, RetargetOperator::Multi}) {
    RetargetSpec spec;
    spec.op = op;
    spec.target_width = 45;
    const StereoPair out = retarget(p, *p.disparity(), spec);
    EXPECT_EQ(out.width(), 45) << to_string(op);
    EXPECT_EQ(out.height(), 48);
    EXPECT_EQ(out.disparity()->width(), 45);
  }
}

TEST(Retarget, OperatorNames) {
  for (auto op : {RetargetOperator::Crop, RetargetOperator::Scale, RetargetOperator::Seam, RetargetOperator::Multi})
    EXPECT_EQ(parse_operator(to_string(op)), op);
  EXPECT_THROW(parse_operator("warp"), ParameterError);
}
