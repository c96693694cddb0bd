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
#include "gair/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <string>

#include "gair/errors.hpp"

namespace gair {
namespace {

constexpr std::uint8_t kDense = 0;
constexpr std::uint8_t kRelu = 1;
constexpr std::uint8_t kConv = 2;

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("truncated checkpoint", bytes_.size());
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct ManifestEntry {
  std::string name;
  std::vector<std::size_t> shape;
};

std::vector<ManifestEntry> expected_manifest(const Model& model) {
  std::vector<ManifestEntry> out;
  const auto names = model.param_names();
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back({names[i], model.params()[i].shape()});
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back({"velocity." + names[i], model.params()[i].shape()});
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  if (c.optimizer.velocity.size() != c.model.params().size()) {
    throw ConfigError("optimizer state does not match the model");
  }
  Writer w;
  w.raw("GAIR");
  w.u32(kCheckpointVersion);
  w.u64(static_cast<std::uint64_t>(c.epoch));
  for (std::uint64_t word : c.rng_state) w.u64(word);

  w.u32(static_cast<std::uint32_t>(c.model.layers().size()));
  for (const auto& layer : c.model.layers()) {
    if (const auto* d = std::get_if<Dense>(&layer)) {
      w.u8(kDense);
      w.u64(d->in);
      w.u64(d->out);
    } else if (const auto* cv = std::get_if<Conv2D>(&layer)) {
      w.u8(kConv);
      w.u64(cv->in_channels);
      w.u64(cv->out_channels);
      w.u64(cv->height);
      w.u64(cv->width);
      w.u64(cv->kernel);
    } else {
      w.u8(kRelu);
    }
  }
  w.f64(c.optimizer.learning_rate);
  w.f64(c.optimizer.momentum);
  w.f64(c.optimizer.weight_decay);

  const auto manifest = expected_manifest(c.model);
  w.u32(static_cast<std::uint32_t>(manifest.size()));
  for (const auto& m : manifest) {
    w.u32(static_cast<std::uint32_t>(m.name.size()));
    w.raw(m.name);
    w.u32(static_cast<std::uint32_t>(m.shape.size()));
    for (std::size_t e : m.shape) w.u64(e);
  }
  for (const auto& p : c.model.params()) {
    for (double v : p.data()) w.f64(v);
  }
  for (const auto& v : c.optimizer.velocity) {
    for (double x : v.data()) w.f64(x);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || r.str(4) != "GAIR") {
    throw FormatError("bad checkpoint magic", 0);
  }
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version == 0 || version > kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (this build reads up to " +
                          std::to_string(kCheckpointVersion) + ")",
                      version_at);
  }
  Checkpoint c;
  c.epoch = static_cast<std::int64_t>(r.u64());
  for (auto& word : c.rng_state) word = r.u64();

  const std::uint32_t layer_count = r.u32();
  std::vector<LayerSpec> layers;
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    const std::size_t at = r.offset();
    switch (r.u8()) {
      case kDense: {
        Dense d;
        d.in = r.u64();
        d.out = r.u64();
        layers.emplace_back(d);
        break;
      }
      case kRelu:
        layers.emplace_back(Relu{});
        break;
      case kConv: {
        Conv2D cv;
        cv.in_channels = r.u64();
        cv.out_channels = r.u64();
        cv.height = r.u64();
        cv.width = r.u64();
        cv.kernel = r.u64();
        layers.emplace_back(cv);
        break;
      }
      default:
        throw FormatError("unknown layer kind", at);
    }
  }
  const std::size_t layers_at = r.offset();
  try {
    c.model = Model(std::move(layers));
  } catch (const ConfigError& err) {
    throw FormatError(std::string("inconsistent layer list: ") + err.what(), layers_at);
  }
  c.optimizer.learning_rate = r.f64();
  c.optimizer.momentum = r.f64();
  c.optimizer.weight_decay = r.f64();

  const auto expected = expected_manifest(c.model);
  const std::size_t count_at = r.offset();
  if (r.u32() != expected.size()) throw FormatError("tensor count does not match the layer list", count_at);
  for (const auto& m : expected) {
    const std::size_t at = r.offset();
    const std::uint32_t len = r.u32();
    if (r.str(len) != m.name) throw FormatError("unexpected tensor name in manifest", at);
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) e = r.u64();
    if (shape != m.shape) throw FormatError("tensor " + m.name + " has an unexpected shape", at);
  }
  for (auto& p : c.model.params()) {
    for (double& v : p.data()) v = r.f64();
  }
  c.optimizer.velocity = c.model.zero_like_params();
  for (auto& v : c.optimizer.velocity) {
    for (double& x : v.data()) x = r.f64();
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint payload", r.offset());
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string(), 0);
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

}  // namespace gair
