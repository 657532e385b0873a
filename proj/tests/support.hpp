#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "vcasir/raster.hpp"

namespace vcasir::test {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("vcasir_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Integer-valued random texture.
inline GrayImage random_texture(int w, int h, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  return GrayImage::generate(w, h, [&](int, int) { return dist(gen); });
}

/// Image whose column c equals `src` column c - shift (edge replicated).
inline GrayImage shift_right(const GrayImage& src, int shift) {
  return GrayImage::generate(src.width(), src.height(), [&](int r, int c) { return src.clamped(r, c - shift); });
}

inline GrayImage constant_image(int w, int h, double v) { return GrayImage(w, h, v); }

/// Rating panel on the 1..5 scale: subjects in `contrary` rate 6 - score, the rest score + noise.
inline std::vector<std::vector<double>> rating_panel(std::size_t subjects, std::size_t images,
                                                     const std::vector<std::size_t>& contrary, std::uint32_t seed,
                                                     double noise = 0.35) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> quality(1.5, 4.5);
  std::normal_distribution<double> jitter(0.0, noise);
  std::vector<double> truth(images);
  for (auto& q : truth) q = quality(gen);
  std::vector<std::vector<double>> out(subjects, std::vector<double>(images));
  for (std::size_t s = 0; s < subjects; ++s) {
    const bool flip = std::find(contrary.begin(), contrary.end(), s) != contrary.end();
    for (std::size_t i = 0; i < images; ++i) {
      const double v = (flip ? 6.0 - truth[i] : truth[i]) + jitter(gen);
      out[s][i] = std::clamp(v, 1.0, 5.0);
    }
  }
  return out;
}

}  // namespace vcasir::test
