#pragma once

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "vcasir/error.hpp"
#include "vcasir/raster.hpp"

namespace vcasir {

/// Affine decoding of 16-bit disparity PNGs: d = raw * scale + offset.
struct DisparityEncoding {
  double scale = 1.0 / 256.0;
  double offset = -128.0;
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

enum class FileKind { Png, Pgm, Ppm, Pfm, Unknown };

inline FileKind sniff(const std::vector<unsigned char>& b) {
  static constexpr unsigned char kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (b.size() >= 8 && std::memcmp(b.data(), kPng, 8) == 0) return FileKind::Png;
  if (b.size() >= 2 && b[0] == 'P') {
    if (b[1] == '5') return FileKind::Pgm;
    if (b[1] == '6') return FileKind::Ppm;
    if (b[1] == 'f' || b[1] == 'F') return FileKind::Pfm;
  }
  return FileKind::Unknown;
}

/// Cursor over a Netpbm-style ASCII header.
class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<unsigned char>& b) : b_(b) {}

  std::string token() {
    skip_space_and_comments();
    std::string t;
    while (pos_ < b_.size() && !std::isspace(b_[pos_])) t.push_back(static_cast<char>(b_[pos_++]));
    if (t.empty()) throw DecodeError("truncated header");
    return t;
  }

  long number() {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0') throw DecodeError("bad header field '" + t + "'");
    return v;
  }

  double real() {
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (*end != '\0') throw DecodeError("bad header field '" + t + "'");
    return v;
  }

  /// Consumes exactly one whitespace byte separating header from payload.
  std::size_t payload_offset() {
    if (pos_ >= b_.size() || !std::isspace(b_[pos_])) throw DecodeError("truncated header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (std::isspace(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 2;  // past the magic
};

/// Raw decoded samples; 8- or 16-bit, 1 or 3 channels.
struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

inline Decoded decode_netpbm(const std::vector<unsigned char>& b, int channels) {
  HeaderReader h(b);
  const long w = h.number();
  const long ht = h.number();
  const long maxval = h.number();
  if (w <= 0 || ht <= 0) throw DimensionError("netpbm: zero dimension");
  if (maxval <= 0 || maxval > 65535) throw DecodeError("netpbm: bad maxval");
  const std::size_t off = h.payload_offset();
  const int bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(ht) *
                            static_cast<std::size_t>(channels);
  if (b.size() < off + count * static_cast<std::size_t>(bytes_per))
    throw DecodeError("netpbm: truncated payload");
  Decoded d{static_cast<int>(w), static_cast<int>(ht), channels, bytes_per * 8, {}};
  d.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    d.samples[i] = bytes_per == 1
                       ? b[off + i]
                       : static_cast<std::uint16_t>((b[off + 2 * i] << 8) | b[off + 2 * i + 1]);
  }
  // Rescale non-255 maxvals to the 8-bit range.
  if (maxval != 255 && maxval != 65535) {
    const double k = (bytes_per == 1 ? 255.0 : 65535.0) / static_cast<double>(maxval);
    for (auto& s : d.samples)
      s = static_cast<std::uint16_t>(std::lround(std::min<double>(s, maxval) * k));
  }
  return d;
}

// libpng reports errors through longjmp; everything touched after setjmp lives in `out`
// (caller frame) so no destructor is skipped.
struct PngReadState {
  Decoded decoded;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
};

extern "C" inline void png_error_jump(png_structp png, png_const_charp) { png_longjmp(png, 1); }
extern "C" inline void png_warning_silent(png_structp, png_const_charp) {}

inline bool png_decode_file(std::FILE* fp, PngReadState& st) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_jump, png_warning_silent);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  st.decoded.width = static_cast<int>(png_get_image_width(png, info));
  st.decoded.height = static_cast<int>(png_get_image_height(png, info));
  st.decoded.channels = png_get_channels(png, info);
  st.decoded.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  st.buffer.resize(rowbytes * static_cast<std::size_t>(st.decoded.height));
  st.rows.resize(static_cast<std::size_t>(st.decoded.height));
  for (std::size_t r = 0; r < st.rows.size(); ++r) st.rows[r] = st.buffer.data() + r * rowbytes;
  png_read_image(png, st.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

inline Decoded decode_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open '" + path.string() + "'");
  PngReadState st;
  if (!png_decode_file(fp.get(), st)) throw DecodeError("png: corrupt or truncated '" + path.string() + "'");
  Decoded& d = st.decoded;
  if (d.width <= 0 || d.height <= 0) throw DimensionError("png: zero dimension");
  if (d.channels != 1 && d.channels != 3) throw FormatError("png: unsupported channel layout");
  const std::size_t count = static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height) *
                            static_cast<std::size_t>(d.channels);
  d.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    d.samples[i] = d.bit_depth == 16
                       ? static_cast<std::uint16_t>((st.buffer[2 * i] << 8) | st.buffer[2 * i + 1])
                       : st.buffer[i];
  }
  return std::move(st.decoded);
}

struct PngWriteState {
  std::vector<png_bytep> rows;
};

inline bool png_encode_file(std::FILE* fp, int width, int height, int channels, int depth,
                            std::vector<unsigned char>& bytes, PngWriteState& st) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_jump, png_warning_silent);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(channels) * (depth / 8);
  st.rows.resize(static_cast<std::size_t>(height));
  for (std::size_t r = 0; r < st.rows.size(); ++r) st.rows[r] = bytes.data() + r * rowbytes;
  png_write_image(png, st.rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

inline void encode_png(const std::filesystem::path& path, int width, int height, int channels,
                       int depth, std::vector<unsigned char> bytes) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot write '" + path.string() + "'");
  PngWriteState st;
  if (!png_encode_file(fp.get(), width, height, channels, depth, bytes, st))
    throw IoError("png: encoding failed for '" + path.string() + "'");
  if (std::fflush(fp.get()) != 0) throw IoError("write failed for '" + path.string() + "'");
}

inline Decoded decode_any(const std::filesystem::path& path, const std::vector<unsigned char>& b) {
  switch (sniff(b)) {
    case FileKind::Png: return decode_png(path);
    case FileKind::Pgm: return decode_netpbm(b, 1);
    case FileKind::Ppm: return decode_netpbm(b, 3);
    default: throw FormatError("unrecognised image format: '" + path.string() + "'");
  }
}

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

inline float load_float(const unsigned char* p, bool little) {
  std::uint32_t u = 0;
  for (int k = 0; k < 4; ++k) {
    const std::uint32_t byte = p[little ? k : 3 - k];
    u |= byte << (8 * k);
  }
  return std::bit_cast<float>(u);
}

inline DisparityMap decode_pfm(const std::vector<unsigned char>& b) {
  if (b[1] == 'F') throw FormatError("pfm: colour PFM is not a disparity map");
  HeaderReader h(b);
  const long w = h.number();
  const long ht = h.number();
  const double scale = h.real();
  if (w <= 0 || ht <= 0) throw DimensionError("pfm: zero dimension");
  if (scale == 0.0 || !std::isfinite(scale)) throw DecodeError("pfm: bad scale field");
  const std::size_t off = h.payload_offset();
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(ht);
  if (b.size() < off + 4 * count) throw DecodeError("pfm: truncated payload");
  const bool little = scale < 0.0;
  std::vector<double> data(count);
  // PFM stores rows bottom-to-top.
  for (long r = 0; r < ht; ++r) {
    const std::size_t src_row = static_cast<std::size_t>(ht - 1 - r);
    for (long c = 0; c < w; ++c) {
      const std::size_t src = off + 4 * (src_row * static_cast<std::size_t>(w) + static_cast<std::size_t>(c));
      const double v = load_float(b.data() + src, little);
      if (!std::isfinite(v)) throw DataError("pfm: non-finite disparity");
      data[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)] = v;
    }
  }
  return DisparityMap(static_cast<int>(w), static_cast<int>(ht), std::move(data));
}

}  // namespace detail

/// Loads PNG (8/16-bit gray or RGB) or binary PGM/PPM as luma. RGB goes through to_gray.
inline GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const detail::Decoded d = detail::decode_any(path, bytes);
  const double k = d.bit_depth == 16 ? 255.0 / 65535.0 : 1.0;
  if (d.channels == 1) {
    std::vector<double> v(d.samples.size());
    std::transform(d.samples.begin(), d.samples.end(), v.begin(),
                   [k](std::uint16_t s) { return k == 1.0 ? static_cast<double>(s) : s * k; });
    return GrayImage(d.width, d.height, std::move(v));
  }
  RgbImage rgb{d.width, d.height, std::vector<double>(d.samples.size())};
  std::transform(d.samples.begin(), d.samples.end(), rgb.data.begin(),
                 [k](std::uint16_t s) { return k == 1.0 ? static_cast<double>(s) : s * k; });
  return to_gray(rgb);
}

/// Writes 8-bit luma (rounded) as PNG or PGM depending on the extension.
inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
  if (img.empty()) throw DimensionError("save_image: empty image");
  std::vector<unsigned char> bytes(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), bytes.begin(), [](double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)));
  });
  const std::string ext = detail::lower_extension(path);
  if (ext == ".png") {
    detail::encode_png(path, img.width(), img.height(), 1, 8, std::move(bytes));
  } else if (ext == ".pgm") {
    std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    out.append(bytes.begin(), bytes.end());
    detail::write_file(path, out);
  } else {
    throw FormatError("save_image: unsupported extension '" + ext + "'");
  }
}

/// Loads a disparity map from little/big-endian PFM (values as stored) or a 16-bit gray PNG
/// (raw * scale + offset).
inline DisparityMap load_disparity(const std::filesystem::path& path,
                                   const DisparityEncoding& enc = {}) {
  const auto bytes = detail::read_file(path);
  switch (detail::sniff(bytes)) {
    case detail::FileKind::Pfm: return detail::decode_pfm(bytes);
    case detail::FileKind::Png: {
      const detail::Decoded d = detail::decode_png(path);
      if (d.channels != 1 || d.bit_depth != 16)
        throw FormatError("disparity PNG must be 16-bit grayscale");
      std::vector<double> v(d.samples.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = d.samples[i] * enc.scale + enc.offset;
      return DisparityMap(d.width, d.height, std::move(v));
    }
    default: throw FormatError("unrecognised disparity format: '" + path.string() + "'");
  }
}

/// PFM stores float32; values representable as float round-trip exactly.
/// 16-bit PNG quantizes to `enc.scale`; out-of-range values are a DataError.
inline void save_disparity(const DisparityMap& map, const std::filesystem::path& path,
                           const DisparityEncoding& enc = {}) {
  if (map.empty()) throw DimensionError("save_disparity: empty map");
  const std::string ext = detail::lower_extension(path);
  if (ext == ".pfm") {
    std::string out = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n-1.0\n";
    out.reserve(out.size() + 4 * map.size());
    for (int r = map.height() - 1; r >= 0; --r) {
      for (double v : map.row(r)) {
        const std::uint32_t u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((u >> (8 * k)) & 0xffu));
      }
    }
    detail::write_file(path, out);
  } else if (ext == ".png") {
    if (!(enc.scale > 0.0)) throw ParameterError("save_disparity: scale must be positive");
    std::vector<unsigned char> bytes(2 * map.size());
    std::size_t i = 0;
    for (double v : map.pixels()) {
      const double raw = std::round((v - enc.offset) / enc.scale);
      if (raw < 0.0 || raw > 65535.0)
        throw DataError("save_disparity: value " + std::to_string(v) + " outside 16-bit range");
      const auto u = static_cast<std::uint16_t>(raw);
      bytes[i++] = static_cast<unsigned char>(u >> 8);
      bytes[i++] = static_cast<unsigned char>(u & 0xffu);
    }
    detail::encode_png(path, map.width(), map.height(), 1, 16, std::move(bytes));
  } else {
    throw FormatError("save_disparity: unsupported extension '" + ext + "'");
  }
}

}  // namespace vcasir
