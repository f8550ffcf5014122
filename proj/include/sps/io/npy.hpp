#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sps/core/types.hpp"

// Minimal NPY v1.0 support for the array interchange contract:
// little-endian, C-contiguous, '<f4' for images/scores/features and '<i4'
// for segment/label maps. Writers emit a fixed 64-byte-aligned header, so
// identical arrays produce byte-identical files.

namespace sps::npy {

namespace detail {

inline void append_u16_le(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline std::string header_bytes(const std::string& descr,
                                const std::vector<size_t>& shape) {
  std::string dict = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': (";
  for (size_t i = 0; i < shape.size(); ++i) {
    dict += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
    if (i + 1 < shape.size()) dict += " ";
  }
  dict += "), }";
  // Pad with spaces so that magic+version+len+dict is a multiple of 64,
  // terminated by a newline.
  const size_t base = 6 + 2 + 2 + dict.size() + 1;
  const size_t pad = (64 - base % 64) % 64;
  dict.append(pad, ' ');
  dict.push_back('\n');

  std::string out = "\x93NUMPY";
  out.push_back('\x01');
  out.push_back('\x00');
  append_u16_le(out, static_cast<uint16_t>(dict.size()));
  out += dict;
  return out;
}

struct ParsedHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<size_t> shape;
};

inline std::string extract_field(const std::string& dict, const std::string& key) {
  const size_t kpos = dict.find("'" + key + "'");
  if (kpos == std::string::npos)
    throw std::runtime_error("npy: header missing key " + key);
  size_t pos = dict.find(':', kpos);
  if (pos == std::string::npos) throw std::runtime_error("npy: malformed header");
  ++pos;
  while (pos < dict.size() && dict[pos] == ' ') ++pos;
  size_t end = pos;
  if (dict[pos] == '\'') {
    end = dict.find('\'', pos + 1);
    return dict.substr(pos + 1, end - pos - 1);
  }
  if (dict[pos] == '(') {
    end = dict.find(')', pos);
    return dict.substr(pos, end - pos + 1);
  }
  while (end < dict.size() && dict[end] != ',' && dict[end] != '}') ++end;
  return dict.substr(pos, end - pos);
}

inline ParsedHeader parse_header(std::istream& in) {
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, "\x93NUMPY", 6) != 0)
    throw std::runtime_error("npy: bad magic");
  unsigned char ver[2];
  in.read(reinterpret_cast<char*>(ver), 2);
  if (!in || ver[0] != 1)
    throw std::runtime_error("npy: only format version 1.x is supported");
  unsigned char lenb[2];
  in.read(reinterpret_cast<char*>(lenb), 2);
  const uint16_t hlen = static_cast<uint16_t>(lenb[0] | (lenb[1] << 8));
  std::string dict(hlen, '\0');
  in.read(dict.data(), hlen);
  if (!in) throw std::runtime_error("npy: truncated header");

  ParsedHeader h;
  h.descr = extract_field(dict, "descr");
  const std::string fo = extract_field(dict, "fortran_order");
  if (fo.rfind("True", 0) == 0)
    throw std::runtime_error("npy: fortran_order arrays are not supported");
  std::string shape = extract_field(dict, "shape");
  // shape like "(128, 128, 4)" or "(5,)"
  size_t pos = 1;
  while (pos < shape.size()) {
    while (pos < shape.size() && (shape[pos] == ' ' || shape[pos] == ','))
      ++pos;
    if (pos >= shape.size() || shape[pos] == ')') break;
    size_t end = pos;
    while (end < shape.size() && isdigit(static_cast<unsigned char>(shape[end])))
      ++end;
    h.shape.push_back(static_cast<size_t>(std::stoull(shape.substr(pos, end - pos))));
    pos = end;
  }
  return h;
}

template <typename T>
inline void write_raw(const std::string& path, const std::string& descr,
                      const std::vector<size_t>& shape,
                      const std::vector<T>& data) {
  size_t count = 1;
  for (size_t d : shape) count *= d;
  if (count != data.size())
    throw std::invalid_argument("npy: shape does not match data size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("npy: cannot open for writing: " + path);
  const std::string header = header_bytes(descr, shape);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(T)));
  if (!out) throw std::runtime_error("npy: write failed: " + path);
}

template <typename T>
inline std::vector<T> read_raw(const std::string& path,
                               const std::string& descr,
                               std::vector<size_t>& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("npy: cannot open: " + path);
  const ParsedHeader h = parse_header(in);
  if (h.descr != descr)
    throw std::runtime_error("npy: expected dtype " + descr + ", found " +
                             h.descr + " in " + path);
  shape = h.shape;
  size_t count = 1;
  for (size_t d : shape) count *= d;
  std::vector<T> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw std::runtime_error("npy: truncated data in " + path);
  return data;
}

}  // namespace detail

inline void save_image(const MultiBandImage& img, const std::string& path) {
  detail::write_raw<float>(path, "<f4",
                           {static_cast<size_t>(img.height),
                            static_cast<size_t>(img.width),
                            static_cast<size_t>(img.bands)},
                           img.data);
}

inline MultiBandImage load_image(const std::string& path) {
  std::vector<size_t> shape;
  std::vector<float> data = detail::read_raw<float>(path, "<f4", shape);
  if (shape.size() != 3)
    throw std::runtime_error("npy: image must be H x W x B: " + path);
  MultiBandImage img(static_cast<int>(shape[0]), static_cast<int>(shape[1]),
                     static_cast<int>(shape[2]));
  img.data = std::move(data);
  if (!img.all_finite())
    throw std::runtime_error("npy: image contains non-finite values: " + path);
  return img;
}

inline void save_features(const FeatureMap& f, const std::string& path) {
  detail::write_raw<float>(path, "<f4",
                           {static_cast<size_t>(f.height),
                            static_cast<size_t>(f.width),
                            static_cast<size_t>(f.depth)},
                           f.data);
}

inline FeatureMap load_features(const std::string& path) {
  std::vector<size_t> shape;
  std::vector<float> data = detail::read_raw<float>(path, "<f4", shape);
  if (shape.size() != 3)
    throw std::runtime_error("npy: features must be H x W x D: " + path);
  FeatureMap f(static_cast<int>(shape[0]), static_cast<int>(shape[1]),
               static_cast<int>(shape[2]));
  f.data = std::move(data);
  return f;
}

inline void save_scores(const ScoreMap& s, const std::string& path) {
  std::vector<float> data(s.values.size());
  for (size_t i = 0; i < data.size(); ++i)
    data[i] = static_cast<float>(s.values[i]);
  detail::write_raw<float>(path, "<f4",
                           {static_cast<size_t>(s.height),
                            static_cast<size_t>(s.width)},
                           data);
}

inline ScoreMap load_scores(const std::string& path) {
  std::vector<size_t> shape;
  std::vector<float> data = detail::read_raw<float>(path, "<f4", shape);
  if (shape.size() != 2)
    throw std::runtime_error("npy: scores must be H x W: " + path);
  ScoreMap s(static_cast<int>(shape[0]), static_cast<int>(shape[1]));
  for (size_t i = 0; i < data.size(); ++i) s.values[i] = data[i];
  return s;
}

inline void save_labels(const LabelMap& m, const std::string& path) {
  detail::write_raw<int32_t>(path, "<i4",
                             {static_cast<size_t>(m.height),
                              static_cast<size_t>(m.width)},
                             m.labels);
}

inline LabelMap load_labels(const std::string& path) {
  std::vector<size_t> shape;
  std::vector<int32_t> data = detail::read_raw<int32_t>(path, "<i4", shape);
  if (shape.size() != 2)
    throw std::runtime_error("npy: labels must be H x W: " + path);
  LabelMap m(static_cast<int>(shape[0]), static_cast<int>(shape[1]));
  m.labels = std::move(data);
  return m;
}

inline void save_segments(const SegmentMap& seg, const std::string& path) {
  detail::write_raw<int32_t>(path, "<i4",
                             {static_cast<size_t>(seg.height),
                              static_cast<size_t>(seg.width)},
                             seg.labels);
}

inline SegmentMap load_segments(const std::string& path) {
  std::vector<size_t> shape;
  std::vector<int32_t> data = detail::read_raw<int32_t>(path, "<i4", shape);
  if (shape.size() != 2)
    throw std::runtime_error("npy: segments must be H x W: " + path);
  SegmentMap seg(static_cast<int>(shape[0]), static_cast<int>(shape[1]));
  seg.labels = std::move(data);
  int32_t max_label = -1;
  for (int32_t v : seg.labels) max_label = std::max(max_label, v);
  seg.n_segments = max_label + 1;
  require_valid_segment_map(seg, "npy: " + path);
  return seg;
}

}  // namespace sps::npy
