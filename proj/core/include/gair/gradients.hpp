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

#include <span>
#include <utility>
#include <vector>

#include "gair/loss.hpp"
#include "gair/model.hpp"
#include "gair/tensor.hpp"

namespace gair {

/// Gradient tensors aligned with Model::params().
using GradientSet = std::vector<Tensor>;

/// Weighted batch objective sum_i w_i * loss_i. An empty `weights` span means
/// the plain mean (w_i = 1/m).
double batch_loss(const Model& model, const Tensor& inputs, const Supervision& target, LossKind kind,
                  std::span<const double> weights = {});

/// Gradient of batch_loss() with respect to every parameter tensor.
GradientSet param_gradients(const Model& model, const Tensor& inputs, const Supervision& target, LossKind kind,
                            std::span<const double> weights = {});

/// batch_loss() and param_gradients() from one forward/backward pass.
std::pair<double, GradientSet> value_and_param_gradients(const Model& model, const Tensor& inputs,
                                                         const Supervision& target, LossKind kind,
                                                         std::span<const double> weights = {});

/// Gradient of sum_i loss_i with respect to the inputs; row i therefore holds
/// the per-example gradient of loss_i. Same shape as `inputs`.
Tensor input_gradient(const Model& model, const Tensor& inputs, const Supervision& target, LossKind kind);

}  // namespace gair
