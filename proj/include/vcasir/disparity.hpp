#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <vector>

#include "vcasir/error.hpp"
#include "vcasir/raster.hpp"

namespace vcasir {

struct BlockMatchParams {
  int window_radius = 4;  // 9x9 window
  int search_min = -128;
  int search_max = 128;
  bool subpixel = false;
};

struct ViewingGeometry {
  double viewing_distance_mm = 0.0;
  double pixels_per_mm = 0.0;
};

namespace detail {

/// Candidate shifts ordered so that a strict `<` scan implements the tie-break:
/// smallest |d| first, negative before positive.
inline std::vector<int> candidate_order(int lo, int hi) {
  std::vector<int> out;
  const int reach = std::max(std::abs(lo), std::abs(hi));
  for (int m = 0; m <= reach; ++m) {
    if (m == 0) {
      if (lo <= 0 && 0 <= hi) out.push_back(0);
      continue;
    }
    if (-m >= lo && -m <= hi) out.push_back(-m);
    if (m >= lo && m <= hi) out.push_back(m);
  }
  return out;
}

}  // namespace detail

/// SAD block matching on luma, left-referenced.
///
/// For every left pixel the window is compared against the right window centred at x - d
/// (d = x_left - x_right). Out-of-image samples are edge-replicated in both views.
inline DisparityMap estimate_disparity(const StereoPair& pair, const BlockMatchParams& params = {}) {
  const int w = pair.width();
  const int h = pair.height();
  const int rad = params.window_radius;
  if (rad < 1) throw ParameterError("block matching: window_radius must be >= 1");
  if (params.search_min >= params.search_max)
    throw ParameterError("block matching: search_min must be < search_max");
  if (w < 2 * rad + 1 || h < 2 * rad + 1)
    throw DimensionError("block matching: image smaller than the matching window");
  if (std::max(std::abs(params.search_min), std::abs(params.search_max)) >= w)
    throw ParameterError("block matching: search range exceeds image width");

  const GrayImage& left = pair.left();
  const GrayImage& right = pair.right();
  const std::vector<int> order = detail::candidate_order(params.search_min, params.search_max);
  const int ext_w = w + 2 * rad;

  std::vector<double> best(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
  std::vector<int> best_d(best.size(), 0);

  std::vector<double> diff(static_cast<std::size_t>(ext_w) * h);
  std::vector<double> colsum(static_cast<std::size_t>(w) * h);
  for (int d : order) {
    // Per-row absolute differences over the column-extended strip.
    for (int r = 0; r < h; ++r) {
      for (int e = 0; e < ext_w; ++e) {
        const int c = e - rad;
        diff[static_cast<std::size_t>(r) * ext_w + e] =
            std::abs(left.clamped(r, c) - right.clamped(r, c - d));
      }
    }
    // Horizontal running window sums.
    for (int r = 0; r < h; ++r) {
      const double* row = diff.data() + static_cast<std::size_t>(r) * ext_w;
      double s = 0.0;
      for (int e = 0; e < 2 * rad + 1; ++e) s += row[e];
      for (int c = 0; c < w; ++c) {
        if (c > 0) s += row[c + 2 * rad] - row[c - 1];
        colsum[static_cast<std::size_t>(r) * w + c] = s;
      }
    }
    // Vertical window sums with replicated rows.
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double s = 0.0;
        for (int dr = -rad; dr <= rad; ++dr)
          s += colsum[static_cast<std::size_t>(std::clamp(r + dr, 0, h - 1)) * w + c];
        const std::size_t i = static_cast<std::size_t>(r) * w + c;
        if (s < best[i]) {
          best[i] = s;
          best_d[i] = d;
        }
      }
    }
  }

  auto sad = [&](int r, int c, int d) {
    double s = 0.0;
    for (int dr = -rad; dr <= rad; ++dr)
      for (int dc = -rad; dc <= rad; ++dc)
        s += std::abs(left.clamped(r + dr, c + dc) - right.clamped(r + dr, c + dc - d));
    return s;
  };

  std::vector<double> out(best.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const int bd = best_d[i];
      double d = bd;
      if (params.subpixel && bd > params.search_min && bd < params.search_max) {
        const double cm = sad(r, c, bd - 1), c0 = sad(r, c, bd), cp = sad(r, c, bd + 1);
        const double denom = cm - 2.0 * c0 + cp;
        if (denom > 0.0) d += 0.5 * (cm - cp) / denom;
      }
      out[i] = std::clamp(d, static_cast<double>(params.search_min),
                          static_cast<double>(params.search_max));
    }
  }
  return DisparityMap(w, h, std::move(out));
}

/// Half-width in pixels of a symmetric comfort zone of +/- `half_angle_deg` of visual angle.
inline double comfort_zone_pixels(double half_angle_deg, const ViewingGeometry& geom) {
  if (!(half_angle_deg > 0.0 && half_angle_deg < 10.0))
    throw ParameterError("comfort zone: half angle must lie in (0, 10) degrees");
  if (!(geom.viewing_distance_mm > 0.0) || !(geom.pixels_per_mm > 0.0))
    throw ParameterError("comfort zone: viewing geometry must be strictly positive");
  const double half_rad = half_angle_deg / 2.0 * std::numbers::pi / 180.0;
  return 2.0 * geom.viewing_distance_mm * std::tan(half_rad) * geom.pixels_per_mm;
}

}  // namespace vcasir
