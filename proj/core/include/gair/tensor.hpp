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

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gair {

/// Dense row-major array of doubles.
///
/// Rank-2 tensors are read as [rows, cols]; for a batch of examples the rows
/// are examples and the columns are features or logits.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  /// [1, n] tensor holding `values`.
  static Tensor row_vector(std::initializer_list<double> values);
  static Tensor row_vector(std::span<const double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Extent of the leading axis, 0 for a default-constructed tensor.
  std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_.front(); }
  /// Product of all trailing extents.
  std::size_t cols() const noexcept;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  /// Copy of row `r` as a [1, cols] tensor.
  Tensor row_tensor(std::size_t r) const;

  /// Gathers the listed rows into a new [indices.size(), cols] tensor.
  Tensor gather_rows(std::span<const std::size_t> indices) const;

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Max absolute coordinate difference; throws ConfigError on shape mismatch.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// L-infinity distance between two equally shaped tensors.
inline double linf_distance(const Tensor& a, const Tensor& b) { return max_abs_diff(a, b); }

}  // namespace gair
