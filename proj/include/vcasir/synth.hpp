#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vcasir/disparity.hpp"
#include "vcasir/error.hpp"
#include "vcasir/features.hpp"
#include "vcasir/image_io.hpp"
#include "vcasir/manifest.hpp"
#include "vcasir/retarget.hpp"
#include "vcasir/rng.hpp"

namespace vcasir {

struct SynthOptions {
  double ratio = 0.7;
  std::uint64_t seed = 0;
  bool synthetic_mos = false;
  double mos_noise = 0.05;
  double seam_gamma = 1.0;
  int block_width = 36;
  ComfortZone zone{};
  DrParams dr{};
};

struct SynthReport {
  Manifest manifest;
  std::vector<std::string> failures;
};

/// Synthetic (non-human) comfort label: a logistic map of the DR feature onto [1, 5].
/// Wider-than-comfortable ranges (DR < 0) score low, narrow ranges score high; midpoint DR = 0.25.
inline double synthetic_mos_from_dr(double dr) { return 1.0 + 4.0 / (1.0 + std::exp(-2.0 * (dr - 0.25))); }

/// Disparity as it will be stored in a PFM file.
inline DisparityMap float_quantized(const DisparityMap& d) {
  return DisparityMap::generate(d.width(), d.height(),
                                [&](int r, int c) { return static_cast<double>(static_cast<float>(d(r, c))); });
}

struct SourceEntry {
  std::string scene;
  std::filesystem::path left;
  std::filesystem::path right;
  std::optional<std::filesystem::path> disparity;
};

/// Finds `<scene>_L.<ext>` / `<scene>_R.<ext>` pairs (png, pgm, ppm) with an optional
/// `<scene>_D.pfm` or `<scene>_D.png`, sorted by scene name.
inline std::vector<SourceEntry> discover_sources(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("source directory '" + dir.string() + "' not found");
  std::vector<SourceEntry> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const std::string ext = detail::lower_extension(f);
    if (stem.size() < 3 || stem.compare(stem.size() - 2, 2, "_L") != 0) continue;
    if (ext != ".png" && ext != ".pgm" && ext != ".ppm") continue;
    SourceEntry s;
    s.scene = stem.substr(0, stem.size() - 2);
    s.left = f;
    s.right = f.parent_path() / (s.scene + "_R" + f.extension().string());
    for (const char* dext : {".pfm", ".png"}) {
      const fs::path d = f.parent_path() / (s.scene + "_D" + dext);
      if (fs::exists(d)) {
        s.disparity = d;
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Block matching with the default search range narrowed to fit the image.
inline DisparityMap estimate_fitted(const StereoPair& pair, BlockMatchParams bm = {}) {
  const int reach = pair.width() - 1;
  bm.search_min = std::max(bm.search_min, -reach);
  bm.search_max = std::min(bm.search_max, reach);
  bm.window_radius = std::min(bm.window_radius, (std::min(pair.width(), pair.height()) - 1) / 2);
  return estimate_disparity(pair, bm);
}

/// Retargets every source pair with all four operators to round(ratio * width) columns and
/// writes views (8-bit PNG), disparities (PFM) and `manifest.csv` into `out_dir`.
/// Per-source failures are recorded and skipped.
inline SynthReport synth_corpus(const std::filesystem::path& source_dir, const std::filesystem::path& out_dir,
                                const SynthOptions& opts = {}) {
  namespace fs = std::filesystem;
  if (!(opts.ratio > 0.0 && opts.ratio <= 1.0)) throw ParameterError("synth: ratio must lie in (0, 1]");
  const auto sources = discover_sources(source_dir);
  fs::create_directories(out_dir);
  Rng rng(opts.seed);
  SynthReport rep;

  for (const auto& src : sources) {
    try {
      GrayImage left = load_image(src.left);
      GrayImage right = load_image(src.right);
      StereoPair pair(std::move(left), std::move(right));
      const DisparityMap dmap =
          src.disparity ? load_disparity(*src.disparity) : estimate_fitted(pair);
      if (!dmap.same_shape(pair.left())) throw DimensionError("disparity map does not match the views");
      const int w = pair.width();
      const int target = static_cast<int>(std::lround(opts.ratio * w));
      if (target < 3) throw ParameterError("target width below 3 columns");

      // Unequal crop offsets move the whole disparity range (depth-adapting crop).
      const int spare = w - target;
      const int offset_left = spare / 2;
      const int offset_right = static_cast<int>(rng.below(static_cast<std::uint64_t>(spare) + 1));

      for (RetargetOperator op :
           {RetargetOperator::Crop, RetargetOperator::Scale, RetargetOperator::Seam, RetargetOperator::Multi}) {
        RetargetSpec spec;
        spec.target_width = target;
        spec.op = op;
        spec.crop_offsets = std::pair{offset_left, offset_right};
        spec.seam_gamma = opts.seam_gamma;
        spec.block_width = opts.block_width;
        const StereoPair out = retarget(pair, dmap, spec);
        const DisparityMap stored = float_quantized(*out.disparity());

        const std::string id = src.scene + "_" + std::string(to_string(op));
        const std::string lname = id + "_L.png", rname = id + "_R.png", dname = id + "_D.pfm";
        save_image(out.left(), out_dir / lname);
        save_image(out.right(), out_dir / rname);
        save_disparity(stored, out_dir / dname);

        ManifestRow row;
        row.id = id;
        row.method = std::string(to_string(op));
        row.scene = src.scene;
        row.left = lname;
        row.right = rname;
        row.disparity = fs::path(dname);
        row.synthetic = opts.synthetic_mos;
        if (opts.synthetic_mos) {
          const double dr = disparity_range_feature(stored, opts.zone, opts.dr);
          MosLabels mos;
          mos.vc = std::clamp(synthetic_mos_from_dr(dr) + opts.mos_noise * rng.normal(), 1.0, 5.0);
          row.mos = mos;
        }
        rep.manifest.rows.push_back(std::move(row));
      }
    } catch (const Error& e) {
      rep.failures.push_back(src.scene + ": " + e.what());
    }
  }
  write_manifest(rep.manifest, out_dir / "manifest.csv");
  return rep;
}

struct SceneOptions {
  int width = 64;
  int height = 48;
  std::uint64_t seed = 0;
  double max_disparity = 170.0;
  double min_disparity = 45.0;
};

/// Procedural textured scene: a receding background ramp plus one elliptical foreground object.
/// The right view samples the same continuous texture at x + d, so any disparity is valid.
inline StereoPair synthetic_scene(Rng& rng, int width, int height, double min_mag = 45.0, double max_mag = 170.0) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double f1 = rng.uniform(1.0, 5.0), f2 = rng.uniform(1.0, 4.0), f3 = rng.uniform(2.0, 7.0);
  const double p1 = rng.uniform(0.0, two_pi), p2 = rng.uniform(0.0, two_pi), p3 = rng.uniform(0.0, two_pi);
  const double a1 = rng.uniform(30.0, 60.0), a3 = rng.uniform(15.0, 35.0);
  auto texture = [&](double r, double x) {
    const double v = 128.0 + a1 * std::sin(two_pi * f1 * x / width + p1) * std::cos(two_pi * f2 * r / height + p2) +
                     a3 * std::sin(two_pi * f3 * (x + 0.7 * r) / width + p3);
    return std::clamp(v, 0.0, 255.0);
  };

  // 1/|d| is uniform, so comfort levels spread evenly.
  auto magnitude = [&] { return 1.0 / rng.uniform(1.0 / max_mag, 1.0 / min_mag); };
  const double background = -magnitude();
  const double foreground = magnitude();
  const double ramp = rng.uniform(0.0, 0.4);
  const double cx = rng.uniform(0.25, 0.75) * width, cy = rng.uniform(0.25, 0.75) * height;
  const double rx = rng.uniform(0.1, 0.25) * width, ry = rng.uniform(0.15, 0.3) * height;
  auto disparity = [&](int r, int c) {
    const double ex = (c - cx) / rx, ey = (r - cy) / ry;
    if (ex * ex + ey * ey <= 1.0) return foreground;
    return background * (1.0 - ramp * c / std::max(width - 1, 1));
  };

  GrayImage left = GrayImage::generate(width, height, [&](int r, int c) { return texture(r, c); });
  GrayImage right = GrayImage::generate(width, height, [&](int r, int c) { return texture(r, c + disparity(r, c)); });
  DisparityMap dmap = DisparityMap::generate(width, height, disparity);
  return StereoPair(std::move(left), std::move(right), std::move(dmap));
}

/// Writes `count` synthetic source scenes as `sceneNNN_{L,R}.png` and `sceneNNN_D.pfm`.
inline std::vector<std::string> generate_synthetic_sources(const std::filesystem::path& dir, int count,
                                                           const SceneOptions& opts = {}) {
  if (count <= 0) throw ParameterError("synth: scene count must be positive");
  if (opts.width < 8 || opts.height < 8) throw ParameterError("synth: synthetic scenes must be at least 8x8");
  std::filesystem::create_directories(dir);
  Rng rng(opts.seed ^ 0x5ce7e5ce7e5ce7e5ULL);
  std::vector<std::string> names;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene%03d", i);
    const StereoPair p = synthetic_scene(rng, opts.width, opts.height, opts.min_disparity, opts.max_disparity);
    save_image(p.left(), dir / (std::string(name) + "_L.png"));
    save_image(p.right(), dir / (std::string(name) + "_R.png"));
    save_disparity(*p.disparity(), dir / (std::string(name) + "_D.pfm"));
    names.emplace_back(name);
  }
  return names;
}

}  // namespace vcasir
