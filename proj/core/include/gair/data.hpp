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
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gair/attacks.hpp"
#include "gair/tensor.hpp"

namespace gair {

/// Labelled examples S = {(x_i, y_i)}.
struct Dataset {
  Tensor inputs;  ///< [n, features]
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;
  bool domain_box = false;  ///< inputs live in [0, 1] (images)

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t features() const noexcept { return inputs.cols(); }
  Tensor example(std::size_t i) const { return inputs.row_tensor(i); }
  Dataset subset(std::span<const std::size_t> indices) const;
  /// [0, 1] when domain_box is set.
  std::optional<Box> clamp_box() const;
  /// Throws ConfigError / DomainError when the invariants do not hold.
  void validate() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Two isotropic Gaussian clouds, class k centred at means[k]. The first
/// n_per_class rows are class 0. Pure function of its arguments.
Dataset gen_gaussian_blobs(std::uint64_t seed, std::size_t n_per_class, const std::array<Point2, 2>& means,
                           double sigma);

/// Two concentric rings of radius radii[k] with Gaussian radial noise and
/// uniform angle. Pure function of its arguments.
Dataset gen_circles(std::uint64_t seed, std::size_t n_per_class, const std::array<double, 2>& radii,
                    double noise_sigma);

/// Seeded permutation of [0, n) cut into ceil(n / m) mini-batches; the last
/// batch may be short.
struct BatchPlan {
  std::uint64_t seed = 0;
  int epoch = 0;
  std::size_t batch_size = 1;
  std::vector<std::size_t> permutation;

  static BatchPlan make(std::size_t n, std::size_t batch_size, std::uint64_t seed, int epoch);

  std::size_t batch_count() const noexcept;
  std::span<const std::size_t> batch(std::size_t b) const;
};

std::vector<std::vector<std::size_t>> batches(const Dataset& data, std::size_t batch_size, std::uint64_t seed,
                                              int epoch);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixels are scaled by 1/255 and domain_box is set. class_count = 0 infers
/// max(label) + 1 (at least 2). Throws FormatError with the failing offset.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 std::size_t class_count = 0);
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                  std::size_t class_count = 0);

/// Writes a dataset as IDX, quantizing round(clamp(x, 0, 1) * 255). Each
/// example is stored as a rows x cols image; rows * cols must equal the
/// feature count (rows = 1 by default).
void save_idx(const Dataset& data, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path, std::size_t rows = 1);
std::vector<std::uint8_t> encode_idx_images(const Dataset& data, std::size_t rows = 1);
std::vector<std::uint8_t> encode_idx_labels(const Dataset& data);

}  // namespace gair
