#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "specvote/errors.hpp"

namespace specvote {

/// Dense per-pixel feature tensor on an h x w grid with `channels` values
/// per cell, stored row-major as (h, w, channels). Files holding a
/// channel-first layout must be transposed by the caller before use.
struct FeatureMap {
  int h = 0;
  int w = 0;
  int channels = 0;
  std::vector<double> data;

  int cells() const { return h * w; }
  const double* cell(int i) const {
    return data.data() + static_cast<std::size_t>(i) * channels;
  }
  double* cell(int i) {
    return data.data() + static_cast<std::size_t>(i) * channels;
  }
};

/// One boolean per pixel, row-major. Stored as bytes 0/1.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  static BinaryMask filled(int height, int width, bool value) {
    return BinaryMask{height, width,
                      std::vector<std::uint8_t>(
                          static_cast<std::size_t>(height) * width, value ? 1 : 0)};
  }
  bool at(int r, int c) const {
    return bits[static_cast<std::size_t>(r) * width + c] != 0;
  }
  void set(int r, int c, bool v) {
    bits[static_cast<std::size_t>(r) * width + c] = v ? 1 : 0;
  }
  std::size_t pixel_count() const { return bits.size(); }
  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }
  bool empty_foreground() const { return foreground_count() == 0; }
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Real values in [0, 1] per pixel, row-major.
struct SoftMask {
  int height = 0;
  int width = 0;
  std::vector<double> values;
};

/// 8-bit single-channel image, used when a prediction file carries graded
/// values rather than a hard mask.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
};

/// Inclusive bounding box of the foreground of a mask.
struct BBox {
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;
  int height() const { return bottom - top + 1; }
  int width() const { return right - left + 1; }
};

/// Bounding box of the set pixels. The mask must have at least one
/// foreground pixel.
inline BBox bounding_box(const BinaryMask& mask) {
  BBox box{mask.height, mask.width, -1, -1};
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      box.top = std::min(box.top, r);
      box.left = std::min(box.left, c);
      box.bottom = std::max(box.bottom, r);
      box.right = std::max(box.right, c);
    }
  }
  if (box.bottom < 0)
    throw parameter_error("bounding_box: mask has no foreground pixels");
  return box;
}

/// Nearest-neighbor resampling. Pixel (i, j) of the output reads source
/// pixel (floor(i*h/target_h), floor(j*w/target_w)), which for an integer
/// upscale factor s reduces to (floor(i/s), floor(j/s)). Binary masks stay
/// binary; no interpolation.
inline BinaryMask resize_mask_nearest(const BinaryMask& mask, int target_h,
                                      int target_w) {
  if (target_h <= 0 || target_w <= 0)
    throw parameter_error("resize_mask_nearest: target dims must be positive");
  BinaryMask out{target_h, target_w,
                 std::vector<std::uint8_t>(
                     static_cast<std::size_t>(target_h) * target_w, 0)};
  for (int i = 0; i < target_h; ++i) {
    const int si = static_cast<int>(
        (static_cast<std::int64_t>(i) * mask.height) / target_h);
    for (int j = 0; j < target_w; ++j) {
      const int sj = static_cast<int>(
          (static_cast<std::int64_t>(j) * mask.width) / target_w);
      out.set(i, j, mask.at(si, sj));
    }
  }
  return out;
}

namespace detail {

inline std::vector<char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) throw io_error("read failed: " + path.string());
  return bytes;
}

/// Write-temp-then-rename so concurrent readers and interrupted runs never
/// observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path,
                              const void* data, std::size_t size) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for write: " + tmp.string());
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(size));
    if (!out) throw io_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("rename failed: " + path.string() + ": " + ec.message());
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& bytes) {
  write_file_atomic(path, bytes.data(), bytes.size());
}

// ---- version-1.0 binary array container ("\x93NUMPY") ----
//
// Layout: 6-byte magic 0x93 'N' 'U' 'M' 'P' 'Y', version bytes 0x01 0x00,
// little-endian u16 header length, ASCII dict with keys descr
// ('<f4'/'<f8'), fortran_order (False) and shape, then the raw
// little-endian C-order payload.

struct NpyHeader {
  bool is_f64 = false;  // '<f8' vs '<f4'
  std::vector<std::size_t> shape;
};

inline std::string npy_extract_value(const std::string& dict,
                                     const std::string& key) {
  const std::string quoted = "'" + key + "'";
  const std::size_t kpos = dict.find(quoted);
  if (kpos == std::string::npos)
    throw format_error("array header missing key '" + key + "'");
  std::size_t pos = dict.find(':', kpos + quoted.size());
  if (pos == std::string::npos)
    throw format_error("array header missing ':' after '" + key + "'");
  ++pos;
  while (pos < dict.size() && dict[pos] == ' ') ++pos;
  if (pos >= dict.size()) throw format_error("array header truncated");
  if (dict[pos] == '\'') {
    const std::size_t end = dict.find('\'', pos + 1);
    if (end == std::string::npos) throw format_error("unterminated string in array header");
    return dict.substr(pos + 1, end - pos - 1);
  }
  if (dict[pos] == '(') {
    const std::size_t end = dict.find(')', pos);
    if (end == std::string::npos) throw format_error("unterminated tuple in array header");
    return dict.substr(pos, end - pos + 1);
  }
  std::size_t end = pos;
  while (end < dict.size() && dict[end] != ',' && dict[end] != '}') ++end;
  std::string token = dict.substr(pos, end - pos);
  while (!token.empty() && token.back() == ' ') token.pop_back();
  return token;
}

inline NpyHeader parse_npy_header(const std::vector<char>& bytes,
                                  std::size_t& payload_offset) {
  static const unsigned char magic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
  if (bytes.size() < 10 ||
      std::memcmp(bytes.data(), magic, 6) != 0)
    throw format_error("bad array file magic");
  const unsigned char major = static_cast<unsigned char>(bytes[6]);
  const unsigned char minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0)
    throw format_error("unsupported array format version " +
                       std::to_string(major) + "." + std::to_string(minor));
  const std::size_t header_len =
      static_cast<unsigned char>(bytes[8]) |
      (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < 10 + header_len)
    throw format_error("truncated array header");
  const std::string dict(bytes.data() + 10, header_len);
  payload_offset = 10 + header_len;

  NpyHeader hdr;
  const std::string descr = npy_extract_value(dict, "descr");
  if (descr == "<f8")
    hdr.is_f64 = true;
  else if (descr == "<f4")
    hdr.is_f64 = false;
  else
    throw format_error("unsupported element type '" + descr +
                       "' (need '<f4' or '<f8')");
  const std::string order = npy_extract_value(dict, "fortran_order");
  if (order != "False")
    throw format_error("fortran-order payloads are not supported");
  std::string shape = npy_extract_value(dict, "shape");
  if (shape.size() < 2 || shape.front() != '(' || shape.back() != ')')
    throw format_error("malformed shape in array header");
  shape = shape.substr(1, shape.size() - 2);
  std::size_t pos = 0;
  while (pos < shape.size()) {
    while (pos < shape.size() && (shape[pos] == ' ' || shape[pos] == ','))
      ++pos;
    if (pos >= shape.size()) break;
    std::size_t end = pos;
    while (end < shape.size() && shape[end] >= '0' && shape[end] <= '9') ++end;
    if (end == pos) throw format_error("malformed shape in array header");
    try {
      hdr.shape.push_back(std::stoull(shape.substr(pos, end - pos)));
    } catch (const std::out_of_range&) {
      throw format_error("shape dimension out of range in array header");
    }
    pos = end;
  }
  return hdr;
}

inline std::string make_npy_header(const std::vector<std::size_t>& shape) {
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
    if (i + 1 < shape.size()) dict += " ";
  }
  dict += "), }";
  // Pad so magic + version + length + dict is a multiple of 64 bytes,
  // ending in newline.
  const std::size_t base = 10 + dict.size() + 1;
  const std::size_t padded = (base + 63) / 64 * 64;
  dict.append(padded - base, ' ');
  dict += '\n';

  std::string out;
  out.reserve(10 + dict.size());
  out.push_back(static_cast<char>(0x93));
  out += "NUMPY";
  out.push_back(1);
  out.push_back(0);
  const std::size_t hlen = dict.size();
  out.push_back(static_cast<char>(hlen & 0xff));
  out.push_back(static_cast<char>((hlen >> 8) & 0xff));
  out += dict;
  return out;
}

}  // namespace detail

/// Read a feature map from a version-1.0 binary array file. The file must
/// hold a 3-dimensional float32 or float64 array laid out (h, w, channels)
/// C-order; float32 is widened to the library's 64-bit working precision.
inline FeatureMap read_feature_map(const std::filesystem::path& path) {
  const std::vector<char> bytes = detail::read_file_bytes(path);
  std::size_t offset = 0;
  const detail::NpyHeader hdr = detail::parse_npy_header(bytes, offset);
  if (hdr.shape.size() != 3)
    throw shape_error("feature file must be 3-dimensional (h, w, channels), got " +
                      std::to_string(hdr.shape.size()) + " dims: " + path.string());
  const std::size_t count = hdr.shape[0] * hdr.shape[1] * hdr.shape[2];
  if (hdr.shape[0] == 0 || hdr.shape[1] == 0 || hdr.shape[2] == 0)
    throw shape_error("feature file has an empty dimension: " + path.string());
  const std::size_t elem = hdr.is_f64 ? 8 : 4;
  if (bytes.size() - offset < count * elem)
    throw format_error("truncated payload in " + path.string());

  FeatureMap map;
  map.h = static_cast<int>(hdr.shape[0]);
  map.w = static_cast<int>(hdr.shape[1]);
  map.channels = static_cast<int>(hdr.shape[2]);
  map.data.resize(count);
  const char* p = bytes.data() + offset;
  if (hdr.is_f64) {
    std::memcpy(map.data.data(), p, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float v;
      std::memcpy(&v, p + i * 4, 4);
      map.data[i] = static_cast<double>(v);
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(map.data[i]))
      throw data_error("non-finite value at flat index " + std::to_string(i) +
                       " in " + path.string());
  }
  return map;
}

/// Write a feature map as a version-1.0 binary array file with '<f8'
/// elements, shape (h, w, channels), C-order.
inline void write_feature_map(const FeatureMap& map,
                              const std::filesystem::path& path) {
  for (double v : map.data)
    if (!std::isfinite(v))
      throw data_error("refusing to write non-finite feature values");
  if (map.data.size() != static_cast<std::size_t>(map.h) * map.w * map.channels)
    throw shape_error("feature map data length does not match h*w*channels");
  std::string out = detail::make_npy_header(
      {static_cast<std::size_t>(map.h), static_cast<std::size_t>(map.w),
       static_cast<std::size_t>(map.channels)});
  const std::size_t header = out.size();
  out.resize(header + map.data.size() * 8);
  std::memcpy(out.data() + header, map.data.data(), map.data.size() * 8);
  detail::write_file_atomic(path, out);
}

/// Write a mask as binary PGM (P5, maxval 255): foreground 255,
/// background 0.
inline void write_mask(const BinaryMask& mask,
                       const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " +
                    std::to_string(mask.height) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    out[header + i] = mask.bits[i] ? static_cast<char>(255) : 0;
  detail::write_file_atomic(path, out);
}

/// Read a binary PGM (P5, maxval <= 255) as raw 8-bit values.
inline GrayImage read_pgm(const std::filesystem::path& path) {
  const std::vector<char> bytes = detail::read_file_bytes(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    for (;;) {
      while (pos < bytes.size() &&
             (bytes[pos] == ' ' || bytes[pos] == '\t' || bytes[pos] == '\n' ||
              bytes[pos] == '\r'))
        ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != ' ' && bytes[pos] != '\t' &&
           bytes[pos] != '\n' && bytes[pos] != '\r')
      ++pos;
    if (start == pos) throw format_error("truncated PGM header: " + path.string());
    return std::string(bytes.data() + start, pos - start);
  };
  if (next_token() != "P5")
    throw format_error("not a P5 PGM file: " + path.string());
  GrayImage img;
  try {
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (maxval <= 0 || maxval > 255)
      throw format_error("unsupported PGM maxval in " + path.string());
  } catch (const std::invalid_argument&) {
    throw format_error("malformed PGM header: " + path.string());
  } catch (const std::out_of_range&) {
    throw format_error("malformed PGM header: " + path.string());
  }
  if (img.width <= 0 || img.height <= 0)
    throw format_error("bad PGM dimensions: " + path.string());
  ++pos;  // single whitespace after maxval
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  if (bytes.size() - pos < count)
    throw format_error("truncated PGM payload: " + path.string());
  img.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + count);
  return img;
}

/// Binarise an 8-bit image: values >= 128 are foreground. Masks written by
/// write_mask (0/255) round-trip exactly.
inline BinaryMask to_mask(const GrayImage& img) {
  BinaryMask mask{img.height, img.width,
                  std::vector<std::uint8_t>(img.pixels.size(), 0)};
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    mask.bits[i] = img.pixels[i] >= 128 ? 1 : 0;
  return mask;
}

/// Convenience wrapper for reading a mask file.
inline BinaryMask read_mask(const std::filesystem::path& path) {
  return to_mask(read_pgm(path));
}

}  // namespace specvote
