#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcasir/disparity.hpp"
#include "vcasir/error.hpp"
#include "vcasir/raster.hpp"

namespace vcasir {

/// Comfortable disparity interval in pixels. Defaults to +/-1 degree in the reference setup.
struct ComfortZone {
  double d_min = -79.55;
  double d_max = 79.55;

  void validate() const {
    if (!(d_min < 0.0 && 0.0 < d_max)) throw ParameterError("comfort zone must satisfy d_min < 0 < d_max");
  }
};

/// Penalty weights for the crossed (alpha) and uncrossed (beta) side of the range.
struct DrParams {
  double alpha = 0.4;
  double beta = 0.6;
  double denom_floor = 1.0;

  void validate() const {
    if (alpha < 0.0 || beta < 0.0 || std::abs(alpha + beta - 1.0) > 1e-12)
      throw ParameterError("DR weights must be non-negative and sum to 1");
    if (!(denom_floor > 0.0)) throw ParameterError("DR denominator floor must be positive");
  }
};

struct DidParams {
  double lambda = 0.5;  // weight of the JNDD-ranked statistics

  void validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("DID lambda must lie in [0, 1]");
  }
};

struct BoundaryDisparity {
  double a_left = 0.0;
  double a_right = 0.0;
  double energy_ratio = 1.0;
  int band_left = 0;
  int band_right = 0;
};

struct DisparityIntensity {
  double mean = 0.0;
  double variance = 0.0;
};

inline constexpr std::size_t kNiqDims = 12;
inline constexpr std::size_t kBaseFeatureDims = 1 + 3 + 2 + kNiqDims;

/// Ordered per-pair features: dr | bd(3) | did(2) | niq(12) | fiq(k).
struct FeatureVector {
  double dr = 0.0;
  std::array<double, 3> bd{};
  std::array<double, 2> did{};
  std::array<double, kNiqDims> niq{};
  std::vector<double> fiq;

  std::size_t dims() const noexcept { return kBaseFeatureDims + fiq.size(); }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(dims());
    out.push_back(dr);
    out.insert(out.end(), bd.begin(), bd.end());
    out.insert(out.end(), did.begin(), did.end());
    out.insert(out.end(), niq.begin(), niq.end());
    out.insert(out.end(), fiq.begin(), fiq.end());
    return out;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Disparity range feature.
///
/// R = alpha (d_min - x) / x' + beta (d_max - y) / y' with x = min(d), y = max(d). The
/// denominators keep their sign but are floored in magnitude; sign(0) is -1 for x, +1 for y.
inline double disparity_range_feature(double min_disparity, double max_disparity,
                                      const ComfortZone& zone = {}, const DrParams& params = {}) {
  zone.validate();
  params.validate();
  const double x = min_disparity;
  const double y = max_disparity;
  const double xd = (x > 0.0 ? 1.0 : -1.0) * std::max(std::abs(x), params.denom_floor);
  const double yd = (y < 0.0 ? -1.0 : 1.0) * std::max(std::abs(y), params.denom_floor);
  return params.alpha * (zone.d_min - x) / xd + params.beta * (zone.d_max - y) / yd;
}

inline double disparity_range_feature(const DisparityMap& dmap, const ComfortZone& zone = {},
                                      const DrParams& params = {}) {
  if (dmap.empty()) throw DimensionError("DR: empty disparity map");
  const auto [lo, hi] = std::minmax_element(dmap.pixels().begin(), dmap.pixels().end());
  return disparity_range_feature(*lo, *hi, zone, params);
}

/// Population variance of luma.
inline double image_energy(const GrayImage& img) {
  if (img.empty()) throw DimensionError("energy: empty image");
  const auto px = img.pixels();
  double mean = 0.0;
  for (double v : px) mean += v;
  mean /= static_cast<double>(px.size());
  double acc = 0.0;
  for (double v : px) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(px.size());
}

/// Width of a boundary band from the mean disparity of the outermost column.
inline int boundary_band_width(const DisparityMap& dmap, int col) {
  double sum = 0.0;
  for (int r = 0; r < dmap.height(); ++r) sum += dmap(r, col);
  const double mag = std::round(std::abs(sum) / dmap.height());
  const int upper = dmap.width() / 2;
  return static_cast<int>(std::clamp(mag, 1.0, static_cast<double>(upper)));
}

inline BoundaryDisparity boundary_disparity_feature(const StereoPair& pair, const DisparityMap& dmap) {
  if (!dmap.same_shape(pair.left())) throw DimensionError("BD: disparity map does not match the views");
  const int m = dmap.width();
  const int n = dmap.height();
  if (m < 4 || n < 1) throw DimensionError("BD: image must be at least 4 columns wide");

  BoundaryDisparity out;
  out.band_left = boundary_band_width(dmap, 0);
  out.band_right = boundary_band_width(dmap, m - 1);

  auto band_mean = [&](int c0, int c1) {
    double s = 0.0;
    for (int r = 0; r < n; ++r)
      for (int c = c0; c < c1; ++c) s += dmap(r, c);
    return s / (static_cast<double>(c1 - c0) * n);
  };
  out.a_left = band_mean(0, out.band_left);
  out.a_right = band_mean(m - out.band_right, m);

  constexpr double kEps = 1e-6;
  out.energy_ratio = (image_energy(pair.left()) + kEps) / (image_energy(pair.right()) + kEps);
  return out;
}

/// Just-noticeable depth difference threshold, graded by |d| in 64-pixel bins.
inline double jndd_threshold(double d) {
  const double a = std::abs(d);
  if (a < 64.0) return 21.0;
  if (a < 128.0) return 19.0;
  if (a < 192.0) return 18.0;
  return 20.0;
}

namespace detail {

/// Gradient magnitude of a 3x3 patch from column, row and main-diagonal differences.
inline double patch_gradient(const std::array<double, 9>& p) {
  const double gh = ((p[2] + p[5] + p[8]) - (p[0] + p[3] + p[6])) / 3.0 / 2.0;
  const double gv = ((p[6] + p[7] + p[8]) - (p[0] + p[1] + p[2])) / 3.0 / 2.0;
  const double gd = (p[8] - p[0]) / (2.0 * std::numbers::sqrt2);
  return std::sqrt(gh * gh + gv * gv + gd * gd);
}

inline DisparityIntensity mean_and_variance(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, var / static_cast<double>(v.size())};
}

}  // namespace detail

/// Disparity intensity distribution over non-overlapping 3x3 tiles (partial tiles dropped).
inline DisparityIntensity did_feature(const DisparityMap& dmap, const DidParams& params = {}) {
  params.validate();
  if (dmap.width() < 3 || dmap.height() < 3) throw DimensionError("DID: map smaller than 3x3");
  const int tiles_x = dmap.width() / 3;
  const int tiles_y = dmap.height() / 3;
  std::vector<double> ranked;
  std::vector<double> raw;
  ranked.reserve(static_cast<std::size_t>(tiles_x) * tiles_y);
  raw.reserve(ranked.capacity());

  std::array<double, 9> patch{};
  std::array<double, 9> ranks{};
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      for (int k = 0; k < 9; ++k) patch[k] = dmap(3 * ty + k / 3, 3 * tx + k % 3);
      const double center = patch[4];
      const double t = jndd_threshold(center);
      for (int k = 0; k < 9; ++k) ranks[k] = std::trunc((patch[k] - center) / t);
      ranked.push_back(detail::patch_gradient(ranks));
      raw.push_back(detail::patch_gradient(patch));
    }
  }
  const auto r = detail::mean_and_variance(ranked);
  const auto g = detail::mean_and_variance(raw);
  const double l = params.lambda;
  return {l * r.mean + (1.0 - l) * g.mean, l * r.variance + (1.0 - l) * g.variance};
}

namespace detail {

inline std::vector<double> box_mean3(const std::vector<double>& v, int w, int h) {
  std::vector<double> out(v.size());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          s += v[static_cast<std::size_t>(std::clamp(r + dr, 0, h - 1)) * w + std::clamp(c + dc, 0, w - 1)];
      out[static_cast<std::size_t>(r) * w + c] = s / 9.0;
    }
  return out;
}

inline double wrap_angle(double a) {
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  return a;
}

inline std::array<double, 2> mean_std(const std::vector<double>& v) {
  const auto mv = mean_and_variance(v);
  return {mv.mean, std::sqrt(mv.variance)};
}

/// [GM mean, GM std, RM mean, RM std, RO mean, RO std] for one view.
inline std::array<double, 6> gradient_statistics(const GrayImage& img) {
  constexpr double kFlat = 1e-9;
  const int w = img.width();
  const int h = img.height();
  const std::size_t n = img.size();
  std::vector<double> gx(n), gy(n), gm(n), theta(n);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      auto at = [&](int dr, int dc) { return img.clamped(r + dr, c + dc); };
      const double x = (at(-1, 1) + 2.0 * at(0, 1) + at(1, 1)) - (at(-1, -1) + 2.0 * at(0, -1) + at(1, -1));
      const double y = (at(1, -1) + 2.0 * at(1, 0) + at(1, 1)) - (at(-1, -1) + 2.0 * at(-1, 0) + at(-1, 1));
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      gx[i] = x;
      gy[i] = y;
      gm[i] = std::hypot(x, y);
      theta[i] = gm[i] < kFlat ? 0.0 : std::atan2(y, x);
    }
  const auto gm_local = box_mean3(gm, w, h);
  const auto gx_local = box_mean3(gx, w, h);
  const auto gy_local = box_mean3(gy, w, h);
  std::vector<double> rm(n), ro(n);
  for (std::size_t i = 0; i < n; ++i) {
    rm[i] = gm[i] - gm_local[i];
    const double local_dir =
        std::hypot(gx_local[i], gy_local[i]) < kFlat ? 0.0 : std::atan2(gy_local[i], gx_local[i]);
    ro[i] = wrap_angle(theta[i] - local_dir);
  }
  const auto a = mean_std(gm);
  const auto b = mean_std(rm);
  const auto c = mean_std(ro);
  return {a[0], a[1], b[0], b[1], c[0], c[1]};
}

}  // namespace detail

/// Oriented-gradient no-reference quality statistics, left view then right view.
inline std::array<double, kNiqDims> niq_features(const StereoPair& pair) {
  if (pair.width() < 3 || pair.height() < 3) throw DimensionError("NIQ: views smaller than 3x3");
  const auto l = detail::gradient_statistics(pair.left());
  const auto r = detail::gradient_statistics(pair.right());
  std::array<double, kNiqDims> out{};
  std::copy(l.begin(), l.end(), out.begin());
  std::copy(r.begin(), r.end(), out.begin() + 6);
  return out;
}

struct ExtractOptions {
  ComfortZone zone{};
  DrParams dr{};
  DidParams did{};
  bool estimate_if_missing = true;
  BlockMatchParams block_match{};
};

/// Assembles the full feature vector. Uses `dmap` when given, else the pair's own map, else
/// block matching (when enabled).
inline FeatureVector extract_features(const StereoPair& pair, const DisparityMap* dmap = nullptr,
                                      const ExtractOptions& opts = {},
                                      std::span<const double> fiq = {}) {
  std::optional<DisparityMap> estimated;
  if (!dmap && pair.disparity()) dmap = &*pair.disparity();
  if (!dmap) {
    if (!opts.estimate_if_missing) throw InputError("extract: no disparity map and estimation disabled");
    estimated = estimate_disparity(pair, opts.block_match);
    dmap = &*estimated;
  }
  if (!dmap->same_shape(pair.left())) throw DimensionError("extract: disparity map does not match the views");

  FeatureVector fv;
  fv.dr = disparity_range_feature(*dmap, opts.zone, opts.dr);
  const auto bd = boundary_disparity_feature(pair, *dmap);
  fv.bd = {bd.a_left, bd.a_right, bd.energy_ratio};
  const auto did = did_feature(*dmap, opts.did);
  fv.did = {did.mean, did.variance};
  fv.niq = niq_features(pair);
  for (double v : fiq)
    if (!std::isfinite(v)) throw DataError("extract: non-finite external quality score");
  fv.fiq.assign(fiq.begin(), fiq.end());
  return fv;
}

}  // namespace vcasir
