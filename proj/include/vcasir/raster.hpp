#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vcasir/error.hpp"

namespace vcasir {

struct LumaTraits {
  static constexpr const char* kName = "image";
  static void check(double v) {
    if (!std::isfinite(v) || v < 0.0 || v > 255.0)
      throw DataError("image sample outside [0, 255]: " + std::to_string(v));
  }
};

struct DisparityTraits {
  static constexpr const char* kName = "disparity map";
  static void check(double v) {
    if (!std::isfinite(v)) throw DataError("non-finite disparity value");
  }
};

/// Immutable single-channel row-major raster of reals.
///
/// Indexing is (row, col); `width` counts columns and `height` rows.
template <class Traits>
class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0)
      throw DimensionError(std::string(Traits::kName) + ": negative dimension");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw DimensionError(std::string(Traits::kName) + ": data length does not match " +
                           std::to_string(width) + "x" + std::to_string(height));
    for (double v : data_) Traits::check(v);
  }

  Raster(int width, int height, double fill)
      : Raster(width, height,
               std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                       static_cast<std::size_t>(std::max(height, 0)),
                                   fill)) {}

  /// Builds a raster from `f(row, col)`.
  template <class F>
  static Raster generate(int width, int height, F&& f) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(std::max(width, 0)) *
                 static_cast<std::size_t>(std::max(height, 0)));
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) data.push_back(static_cast<double>(f(r, c)));
    return Raster(width, height, std::move(data));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  double operator()(int row, int col) const noexcept {
    return data_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(col)];
  }

  /// Edge-replicated access.
  double clamped(int row, int col) const noexcept {
    return (*this)(std::clamp(row, 0, height_ - 1), std::clamp(col, 0, width_ - 1));
  }

  std::span<const double> pixels() const noexcept { return data_; }
  std::span<const double> row(int r) const noexcept {
    return std::span<const double>(data_).subspan(
        static_cast<std::size_t>(r) * static_cast<std::size_t>(width_),
        static_cast<std::size_t>(width_));
  }

  bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }
  template <class Other>
  bool same_shape(const Raster<Other>& o) const noexcept {
    return same_shape(o.width(), o.height());
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

using GrayImage = Raster<LumaTraits>;

/// Signed horizontal disparity in pixels, left-view referenced.
/// Sign convention: d = x_left - x_right, positive means crossed (in front of the screen).
using DisparityMap = Raster<DisparityTraits>;

/// Interleaved RGB raster, samples in [0, 255].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // r, g, b per pixel
};

/// Rec.601 luma. Values stay real-valued; only the final clamp guards rounding at 255.
inline GrayImage to_gray(const RgbImage& rgb) {
  if (rgb.width <= 0 || rgb.height <= 0) throw DimensionError("to_gray: empty raster");
  const std::size_t n = static_cast<std::size_t>(rgb.width) * static_cast<std::size_t>(rgb.height);
  if (rgb.data.size() != 3 * n) throw DimensionError("to_gray: data length mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v =
        0.299 * rgb.data[3 * i] + 0.587 * rgb.data[3 * i + 1] + 0.114 * rgb.data[3 * i + 2];
    if (!std::isfinite(v)) throw DataError("to_gray: non-finite sample");
    y[i] = std::clamp(v, 0.0, 255.0);
  }
  return GrayImage(rgb.width, rgb.height, std::move(y));
}

/// Left/right views plus an optional left-referenced disparity map.
class StereoPair {
 public:
  StereoPair(GrayImage left, GrayImage right, std::optional<DisparityMap> disparity = std::nullopt)
      : left_(std::move(left)), right_(std::move(right)), disparity_(std::move(disparity)) {
    if (!left_.same_shape(right_))
      throw DimensionError("stereo pair: left and right views differ in size");
    if (disparity_ && !disparity_->same_shape(left_))
      throw DimensionError("stereo pair: disparity map does not match the left view");
  }

  const GrayImage& left() const noexcept { return left_; }
  const GrayImage& right() const noexcept { return right_; }
  const std::optional<DisparityMap>& disparity() const noexcept { return disparity_; }
  int width() const noexcept { return left_.width(); }
  int height() const noexcept { return left_.height(); }

 private:
  GrayImage left_;
  GrayImage right_;
  std::optional<DisparityMap> disparity_;
};

}  // namespace vcasir
