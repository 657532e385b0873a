#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "vcasir/error.hpp"
#include "vcasir/raster.hpp"

namespace vcasir {

struct EnergyTraits {
  static constexpr const char* kName = "energy map";
  static void check(double v) {
    if (!std::isfinite(v) || v < 0.0) throw DataError("energy must be finite and non-negative");
  }
};
using EnergyMap = Raster<EnergyTraits>;

/// One column index per row, 8-connected from top to bottom.
struct Seam {
  std::vector<int> columns;

  bool connected() const noexcept {
    for (std::size_t i = 1; i < columns.size(); ++i)
      if (std::abs(columns[i] - columns[i - 1]) > 1) return false;
    return true;
  }
  friend bool operator==(const Seam&, const Seam&) = default;
};

enum class RetargetOperator { Crop, Scale, Seam, Multi };

inline std::string_view to_string(RetargetOperator op) {
  switch (op) {
    case RetargetOperator::Crop: return "crop";
    case RetargetOperator::Scale: return "scale";
    case RetargetOperator::Seam: return "seam";
    case RetargetOperator::Multi: return "multi";
  }
  return "?";
}

inline RetargetOperator parse_operator(std::string_view s) {
  if (s == "crop") return RetargetOperator::Crop;
  if (s == "scale") return RetargetOperator::Scale;
  if (s == "seam") return RetargetOperator::Seam;
  if (s == "multi") return RetargetOperator::Multi;
  throw ParameterError("unknown retargeting operator '" + std::string(s) + "'");
}

struct RetargetSpec {
  int target_width = 0;
  RetargetOperator op = RetargetOperator::Crop;
  std::optional<std::pair<int, int>> crop_offsets;  // (left, right); centred equal offsets when empty
  double seam_gamma = 1.0;
  int block_width = 36;
};

/// e = |forward dx| + |forward dy|; the last row and column see a replicated neighbour.
inline EnergyMap gradient_energy(const GrayImage& img) {
  if (img.width() < 2 || img.height() < 2) throw DimensionError("gradient energy: image must be at least 2x2");
  return EnergyMap::generate(img.width(), img.height(), [&](int r, int c) {
    const double v = img(r, c);
    return std::abs(img.clamped(r, c + 1) - v) + std::abs(img.clamped(r + 1, c) - v);
  });
}

/// Minimum cumulative-energy vertical seam. Ties go to the leftmost column at the end row
/// and at every backtracking step.
inline Seam find_vertical_seam(const EnergyMap& energy) {
  const int w = energy.width();
  const int h = energy.height();
  if (w < 3 || h < 1) throw DimensionError("seam search: energy map needs at least 3 columns");
  std::vector<double> acc(energy.pixels().begin(), energy.pixels().end());
  auto at = [&](int r, int c) -> double& { return acc[static_cast<std::size_t>(r) * w + c]; };
  for (int r = 1; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double best = at(r - 1, c);
      if (c > 0) best = std::min(best, at(r - 1, c - 1));
      if (c + 1 < w) best = std::min(best, at(r - 1, c + 1));
      at(r, c) += best;
    }

  Seam seam;
  seam.columns.resize(static_cast<std::size_t>(h));
  int col = 0;
  for (int c = 1; c < w; ++c)
    if (at(h - 1, c) < at(h - 1, col)) col = c;
  seam.columns[static_cast<std::size_t>(h - 1)] = col;
  for (int r = h - 1; r > 0; --r) {
    int pick = std::max(col - 1, 0);
    for (int c = pick + 1; c <= std::min(col + 1, w - 1); ++c)
      if (at(r - 1, c) < at(r - 1, pick)) pick = c;
    col = pick;
    seam.columns[static_cast<std::size_t>(r - 1)] = col;
  }
  return seam;
}

namespace detail {

template <class T>
Raster<T> remove_per_row(const Raster<T>& src, const std::vector<int>& cols) {
  const int w = src.width();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w - 1) * src.height());
  for (int r = 0; r < src.height(); ++r) {
    const auto row = src.row(r);
    const int skip = cols[static_cast<std::size_t>(r)];
    for (int c = 0; c < w; ++c)
      if (c != skip) out.push_back(row[static_cast<std::size_t>(c)]);
  }
  return Raster<T>(w - 1, src.height(), std::move(out));
}

template <class T>
Raster<T> slice_columns(const Raster<T>& src, int c0, int width) {
  return Raster<T>::generate(width, src.height(), [&](int r, int c) { return src(r, c0 + c); });
}

template <class T>
Raster<T> concat_columns(const std::vector<Raster<T>>& parts) {
  if (parts.empty()) return {};
  const int h = parts.front().height();
  int w = 0;
  for (const auto& p : parts) w += p.width();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r)
    for (const auto& p : parts) {
      const auto row = p.row(r);
      out.insert(out.end(), row.begin(), row.end());
    }
  return Raster<T>(w, h, std::move(out));
}

/// Bilinear horizontal resampling with pixel-centre alignment.
template <class T>
Raster<T> resample_columns(const Raster<T>& src, int target_width, double value_scale = 1.0) {
  const int w = src.width();
  const double ratio = static_cast<double>(w) / target_width;
  std::vector<int> x0(static_cast<std::size_t>(target_width)), x1(x0.size());
  std::vector<double> frac(x0.size());
  for (int t = 0; t < target_width; ++t) {
    const double s = std::clamp((t + 0.5) * ratio - 0.5, 0.0, static_cast<double>(w - 1));
    const int i0 = static_cast<int>(std::floor(s));
    x0[static_cast<std::size_t>(t)] = i0;
    x1[static_cast<std::size_t>(t)] = std::min(i0 + 1, w - 1);
    frac[static_cast<std::size_t>(t)] = s - i0;
  }
  return Raster<T>::generate(target_width, src.height(), [&](int r, int t) {
    const auto k = static_cast<std::size_t>(t);
    const double a = src(r, x0[k]);
    const double b = src(r, x1[k]);
    double v = a + frac[k] * (b - a);
    if constexpr (std::is_same_v<T, LumaTraits>) v = std::clamp(v, 0.0, 255.0);
    return value_scale == 1.0 ? v : v * value_scale;
  });
}

struct CarveOutcome {
  GrayImage left;
  GrayImage right;
  DisparityMap disparity;
  double removed_energy = 0.0;
};

inline CarveOutcome carve(const GrayImage& left0, const GrayImage& right0, const DisparityMap& dmap0,
                          int k, double gamma) {
  CarveOutcome st{left0, right0, dmap0, 0.0};
  for (int it = 0; it < k; ++it) {
    const int w = st.left.width();
    const int h = st.left.height();
    const EnergyMap el = gradient_energy(st.left);
    const EnergyMap er = gradient_energy(st.right);
    const DisparityMap& d = st.disparity;
    auto matched = [&](int r, int c) {
      return static_cast<int>(std::clamp(std::round(c - d(r, c)), 0.0, static_cast<double>(w - 1)));
    };
    const EnergyMap combined = EnergyMap::generate(w, h, [&](int r, int c) {
      return el(r, c) + er(r, matched(r, c)) + gamma * std::abs(d.clamped(r, c + 1) - d(r, c));
    });
    const Seam seam = find_vertical_seam(combined);
    std::vector<int> right_cols(static_cast<std::size_t>(h));
    for (int r = 0; r < h; ++r) {
      const int c = seam.columns[static_cast<std::size_t>(r)];
      right_cols[static_cast<std::size_t>(r)] = matched(r, c);
      st.removed_energy += combined(r, c);
    }
    st.left = remove_per_row(st.left, seam.columns);
    st.right = remove_per_row(st.right, right_cols);
    st.disparity = remove_per_row(st.disparity, seam.columns);
  }
  return st;
}

inline void check_pair_map(const StereoPair& pair, const DisparityMap& dmap, const char* who) {
  if (!dmap.same_shape(pair.left()))
    throw DimensionError(std::string(who) + ": disparity map does not match the views");
}

}  // namespace detail

/// Removes `k` seams found on the left view; the right view loses the disparity-matched pixel
/// of every row. Surviving disparities are left untouched.
inline StereoPair stereo_seam_carve(const StereoPair& pair, const DisparityMap& dmap, int k,
                                    double gamma = 1.0) {
  detail::check_pair_map(pair, dmap, "seam carving");
  if (k < 0 || k >= pair.width() - 2)
    throw ParameterError("seam carving: seam count must satisfy 0 <= k < width - 2");
  if (!(gamma >= 0.0)) throw ParameterError("seam carving: gamma must be >= 0");
  if (pair.height() < 2) throw DimensionError("seam carving: image must be at least 2 rows high");
  auto st = detail::carve(pair.left(), pair.right(), dmap, k, gamma);
  return StereoPair(std::move(st.left), std::move(st.right), std::move(st.disparity));
}

/// Keeps columns [o_l, o_l + W) of the left view and [o_r, o_r + W) of the right view.
/// Disparities shift by o_r - o_l.
inline StereoPair stereo_crop(const StereoPair& pair, const DisparityMap& dmap, int target_width,
                              int offset_left, int offset_right) {
  detail::check_pair_map(pair, dmap, "crop");
  const int w = pair.width();
  if (target_width <= 0 || target_width > w) throw ParameterError("crop: target width out of range");
  if (offset_left < 0 || offset_right < 0 || offset_left + target_width > w ||
      offset_right + target_width > w)
    throw ParameterError("crop: offsets place the window outside the image");
  const double shift = static_cast<double>(offset_right - offset_left);
  auto left = detail::slice_columns(pair.left(), offset_left, target_width);
  auto right = detail::slice_columns(pair.right(), offset_right, target_width);
  auto disp = DisparityMap::generate(target_width, pair.height(),
                                     [&](int r, int c) { return dmap(r, offset_left + c) + shift; });
  return StereoPair(std::move(left), std::move(right), std::move(disp));
}

/// Horizontal bilinear resize of both views; disparities are resampled and scaled by W'/W.
inline StereoPair stereo_scale(const StereoPair& pair, const DisparityMap& dmap, int target_width) {
  detail::check_pair_map(pair, dmap, "scale");
  if (target_width <= 0 || target_width > pair.width())
    throw ParameterError("scale: target width out of range");
  const double s = static_cast<double>(target_width) / pair.width();
  return StereoPair(detail::resample_columns(pair.left(), target_width),
                    detail::resample_columns(pair.right(), target_width),
                    detail::resample_columns(dmap, target_width, s));
}

struct MultiOperatorResult {
  StereoPair pair;
  std::vector<RetargetOperator> block_ops;  // Crop, Seam or Scale per source block
};

/// Reduces each block of `block_width` source columns with the cheapest of equal-offset crop,
/// seam carving and scaling, then concatenates the blocks.
///
/// Block cost is the gradient energy removed: cut columns for crop, carved seams for seam,
/// (1 - s) times the block energy for scale. Ties prefer crop, then seam, then scale.
inline MultiOperatorResult stereo_multi_operator(const StereoPair& pair, const DisparityMap& dmap,
                                                 int target_width, int block_width = 36,
                                                 double gamma = 1.0) {
  detail::check_pair_map(pair, dmap, "multi-operator");
  if (block_width < 3) throw ParameterError("multi-operator: block width must be >= 3");
  if (!(gamma >= 0.0)) throw ParameterError("multi-operator: gamma must be >= 0");
  const int w = pair.width();
  const int h = pair.height();
  if (target_width <= 0 || target_width > w) throw ParameterError("multi-operator: target width out of range");
  if (h < 2) throw DimensionError("multi-operator: image must be at least 2 rows high");
  const double s = static_cast<double>(target_width) / w;

  // Per-block targets: rounded share, topped up by largest deficit when the sum falls short.
  std::vector<int> starts, widths, targets;
  for (int c = 0; c < w; c += block_width) {
    starts.push_back(c);
    widths.push_back(std::min(block_width, w - c));
    targets.push_back(static_cast<int>(std::round(widths.back() * s)));
  }
  int total = 0;
  for (int t : targets) total += t;
  while (total < target_width) {
    std::size_t pick = targets.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < targets.size(); ++b) {
      if (targets[b] >= widths[b]) continue;
      const double deficit = widths[b] * s - targets[b];
      if (deficit > best) {
        best = deficit;
        pick = b;
      }
    }
    ++targets[pick];
    ++total;
  }

  std::vector<GrayImage> lefts, rights;
  std::vector<DisparityMap> disps;
  std::vector<RetargetOperator> ops;
  for (std::size_t b = 0; b < starts.size(); ++b) {
    const int c0 = starts[b];
    const int bw = widths[b];
    const int bt = targets[b];
    const GrayImage bl = detail::slice_columns(pair.left(), c0, bw);
    const GrayImage br = detail::slice_columns(pair.right(), c0, bw);
    const DisparityMap bd = detail::slice_columns(dmap, c0, bw);
    const int cut = bw - bt;
    if (cut == 0) {
      lefts.push_back(bl);
      rights.push_back(br);
      disps.push_back(bd);
      ops.push_back(RetargetOperator::Crop);
      continue;
    }
    if (bt == 0) {
      ops.push_back(RetargetOperator::Crop);
      continue;
    }

    std::vector<double> col_energy(static_cast<std::size_t>(bw), 0.0);
    double block_energy = 0.0;
    if (bw >= 2) {
      const EnergyMap el = gradient_energy(bl);
      const EnergyMap er = gradient_energy(br);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < bw; ++c) col_energy[static_cast<std::size_t>(c)] += el(r, c) + er(r, c);
      for (double e : col_energy) block_energy += e;
    }

    // Crop: best contiguous window of bt columns.
    int best_offset = 0;
    double crop_cost = std::numeric_limits<double>::infinity();
    for (int o = 0; o <= cut; ++o) {
      double removed = 0.0;
      for (int c = 0; c < o; ++c) removed += col_energy[static_cast<std::size_t>(c)];
      for (int c = o + bt; c < bw; ++c) removed += col_energy[static_cast<std::size_t>(c)];
      if (removed < crop_cost) {
        crop_cost = removed;
        best_offset = o;
      }
    }

    std::optional<detail::CarveOutcome> carved;
    double seam_cost = std::numeric_limits<double>::infinity();
    if (bt > 2) {
      carved = detail::carve(bl, br, bd, cut, gamma);
      seam_cost = carved->removed_energy;
    }
    const double sb = static_cast<double>(bt) / bw;
    const double scale_cost = (1.0 - sb) * block_energy;

    if (crop_cost <= seam_cost && crop_cost <= scale_cost) {
      lefts.push_back(detail::slice_columns(bl, best_offset, bt));
      rights.push_back(detail::slice_columns(br, best_offset, bt));
      disps.push_back(detail::slice_columns(bd, best_offset, bt));
      ops.push_back(RetargetOperator::Crop);
    } else if (seam_cost <= scale_cost) {
      lefts.push_back(std::move(carved->left));
      rights.push_back(std::move(carved->right));
      disps.push_back(std::move(carved->disparity));
      ops.push_back(RetargetOperator::Seam);
    } else {
      lefts.push_back(detail::resample_columns(bl, bt));
      rights.push_back(detail::resample_columns(br, bt));
      disps.push_back(detail::resample_columns(bd, bt, sb));
      ops.push_back(RetargetOperator::Scale);
    }
  }

  GrayImage left = detail::concat_columns(lefts);
  GrayImage right = detail::concat_columns(rights);
  DisparityMap disp = detail::concat_columns(disps);
  // Rounding can overshoot; trim centred with equal offsets.
  if (left.width() > target_width) {
    const int excess = left.width() - target_width;
    const int off = excess / 2;
    left = detail::slice_columns(left, off, target_width);
    right = detail::slice_columns(right, off, target_width);
    disp = detail::slice_columns(disp, off, target_width);
  }
  return {StereoPair(std::move(left), std::move(right), std::move(disp)), std::move(ops)};
}

/// Dispatches one operator. Crop without explicit offsets uses centred equal offsets.
inline StereoPair retarget(const StereoPair& pair, const DisparityMap& dmap, const RetargetSpec& spec) {
  switch (spec.op) {
    case RetargetOperator::Crop: {
      const int centred = (pair.width() - spec.target_width) / 2;
      const auto [ol, orr] = spec.crop_offsets.value_or(std::pair{centred, centred});
      return stereo_crop(pair, dmap, spec.target_width, ol, orr);
    }
    case RetargetOperator::Scale: return stereo_scale(pair, dmap, spec.target_width);
    case RetargetOperator::Seam:
      return stereo_seam_carve(pair, dmap, pair.width() - spec.target_width, spec.seam_gamma);
    case RetargetOperator::Multi:
      return stereo_multi_operator(pair, dmap, spec.target_width, spec.block_width, spec.seam_gamma).pair;
  }
  throw ParameterError("unknown retargeting operator");
}

}  // namespace vcasir
