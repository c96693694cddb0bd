/*
 * Copyright 2026 The gairlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "gair/data.hpp"
#include "gair/errors.hpp"

namespace gair {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset, const char* what) {
  if (offset + 4 > bytes.size()) throw FormatError(std::string("truncated IDX header reading ") + what, offset);
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open IDX file " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                  std::size_t class_count) {
  const std::uint32_t image_magic = read_be32(images, 0, "image magic");
  if (image_magic != kImageMagic) throw FormatError("bad IDX image magic", 0);
  const std::uint32_t label_magic = read_be32(labels, 0, "label magic");
  if (label_magic != kLabelMagic) throw FormatError("bad IDX label magic", 0);

  const std::size_t n = read_be32(images, 4, "image count");
  const std::size_t rows = read_be32(images, 8, "row count");
  const std::size_t cols = read_be32(images, 12, "column count");
  const std::size_t label_count = read_be32(labels, 4, "label count");
  if (label_count != n) {
    throw FormatError("label count " + std::to_string(label_count) + " does not match image count " +
                          std::to_string(n),
                      4);
  }
  if (n == 0 || rows == 0 || cols == 0) throw FormatError("IDX dimensions must be positive", 4);

  const std::size_t features = rows * cols;
  const std::size_t image_end = 16 + n * features;
  if (images.size() < image_end) throw FormatError("truncated IDX image payload", images.size());
  if (images.size() > image_end) throw FormatError("trailing bytes after IDX image payload", image_end);
  if (labels.size() < 8 + n) throw FormatError("truncated IDX label payload", labels.size());
  if (labels.size() > 8 + n) throw FormatError("trailing bytes after IDX label payload", 8 + n);

  Dataset out;
  out.domain_box = true;
  out.inputs = Tensor({n, features});
  for (std::size_t i = 0; i < n * features; ++i) out.inputs[i] = static_cast<double>(images[16 + i]) / 255.0;
  std::size_t max_label = 0;
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.labels.push_back(labels[8 + i]);
    max_label = std::max<std::size_t>(max_label, labels[8 + i]);
  }
  if (class_count == 0) {
    class_count = std::max<std::size_t>(2, max_label + 1);
  } else if (max_label >= class_count) {
    throw FormatError("label " + std::to_string(max_label) + " exceeds declared class count", 8);
  }
  out.class_count = class_count;
  return out;
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 std::size_t class_count) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  return parse_idx(images, labels, class_count);
}

std::vector<std::uint8_t> encode_idx_images(const Dataset& data, std::size_t rows) {
  const std::size_t features = data.features();
  if (rows == 0 || features % rows != 0) throw ConfigError("image rows must divide the feature count");
  std::vector<std::uint8_t> out;
  out.reserve(16 + data.inputs.size());
  write_be32(out, kImageMagic);
  write_be32(out, static_cast<std::uint32_t>(data.size()));
  write_be32(out, static_cast<std::uint32_t>(rows));
  write_be32(out, static_cast<std::uint32_t>(features / rows));
  for (double v : data.inputs.data()) {
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const Dataset& data) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + data.size());
  write_be32(out, kLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(data.size()));
  for (std::size_t y : data.labels) {
    if (y > 255) throw ConfigError("IDX labels must fit in one byte");
    out.push_back(static_cast<std::uint8_t>(y));
  }
  return out;
}

void save_idx(const Dataset& data, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path, std::size_t rows) {
  write_file(images_path, encode_idx_images(data, rows));
  write_file(labels_path, encode_idx_labels(data));
}

}  // namespace gair
