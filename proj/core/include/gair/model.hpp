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
#include <string>
#include <variant>
#include <vector>

#include "gair/rng.hpp"
#include "gair/tensor.hpp"

namespace gair {

/// Fully connected layer y = W x + b with W stored as [out, in].
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
  friend bool operator==(const Dense&, const Dense&) = default;
};

/// Elementwise max(0, x); its width is taken from the preceding layer.
struct Relu {
  friend bool operator==(const Relu&, const Relu&) = default;
};

/// Stride-1 convolution with zero 'same' padding over a flattened CHW image.
/// Kernel extent must be odd. W is stored as [out_channels, in_channels, k, k].
struct Conv2D {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel = 3;
  friend bool operator==(const Conv2D&, const Conv2D&) = default;
};

using LayerSpec = std::variant<Dense, Relu, Conv2D>;

/// Flattened input and output width of a layer given its input width.
std::size_t layer_output_size(const LayerSpec& layer, std::size_t input_size);

/// Ordered layer stack mapping [batch, features] to logits [batch, C].
///
/// forward() and backward() never mutate the model, so concurrent readers are
/// safe; only the optimizer writes through params().
class Model {
 public:
  /// Activations recorded by forward_trace(); values[0] is the input and
  /// values[i + 1] the output of layer i.
  struct Trace {
    std::vector<Tensor> values;
    const Tensor& logits() const { return values.back(); }
  };

  Model() = default;
  /// Validates the layer chain and allocates zero-filled parameters.
  explicit Model(std::vector<LayerSpec> layers);

  /// He-normal weights, zero biases.
  static Model initialized(std::vector<LayerSpec> layers, Rng& rng);

  std::size_t input_size() const noexcept { return input_size_; }
  std::size_t class_count() const noexcept { return class_count_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }

  /// Weight and bias tensors in layer order (weight first).
  std::vector<Tensor>& params() noexcept { return params_; }
  const std::vector<Tensor>& params() const noexcept { return params_; }
  /// "layer<i>.weight" / "layer<i>.bias" for each entry of params().
  std::vector<std::string> param_names() const;

  Tensor forward(const Tensor& inputs) const;
  Trace forward_trace(const Tensor& inputs) const;

  /// Backpropagates dLoss/dlogits through a recorded trace. Parameter
  /// gradients are accumulated into `param_grads` when it is non-null; the
  /// return value is dLoss/dinputs.
  Tensor backward(const Trace& trace, const Tensor& logit_grad, std::vector<Tensor>* param_grads) const;

  /// Zero tensors shaped like params().
  std::vector<Tensor> zero_like_params() const;

  friend bool operator==(const Model&, const Model&) = default;

 private:
  void check_input(const Tensor& inputs) const;

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> widths_;        // widths_[i] = input width of layer i; back() = C
  std::vector<std::size_t> param_offset_;  // index into params_ of layer i's weight, or npos
  std::vector<Tensor> params_;
  std::size_t input_size_ = 0;
  std::size_t class_count_ = 0;
};

}  // namespace gair
