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
#include "gair/gradients.hpp"

#include "gair/errors.hpp"

namespace gair {
namespace {

std::vector<double> resolve_weights(std::span<const double> weights, std::size_t batch) {
  if (weights.empty()) return std::vector<double>(batch, 1.0 / static_cast<double>(batch));
  if (weights.size() != batch) throw ConfigError("need exactly one weight per example");
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("per-example weights must be nonnegative");
  }
  return {weights.begin(), weights.end()};
}

// dObjective/dlogits with per-example scale; returns the objective.
double logit_gradient(const Tensor& logits, const Supervision& target, LossKind kind, std::span<const double> scale,
                      Tensor& grad) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto g = grad.row(i);
    total += scale[i] * loss_gradient(logits.row(i), target.at(i, kind), kind, g);
    for (double& v : g) v *= scale[i];
  }
  return total;
}

}  // namespace

double batch_loss(const Model& model, const Tensor& inputs, const Supervision& target, LossKind kind,
                  std::span<const double> weights) {
  const Tensor logits = model.forward(inputs);
  target.validate(kind, logits.rows(), logits.cols());
  const auto w = resolve_weights(weights, logits.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) total += w[i] * loss_value(logits.row(i), target.at(i, kind), kind);
  return total;
}

std::pair<double, GradientSet> value_and_param_gradients(const Model& model, const Tensor& inputs,
                                                         const Supervision& target, LossKind kind,
                                                         std::span<const double> weights) {
  const auto trace = model.forward_trace(inputs);
  const Tensor& logits = trace.logits();
  target.validate(kind, logits.rows(), logits.cols());
  const auto w = resolve_weights(weights, logits.rows());
  Tensor grad(logits.shape());
  const double value = logit_gradient(logits, target, kind, w, grad);
  GradientSet out = model.zero_like_params();
  model.backward(trace, grad, &out);
  return {value, std::move(out)};
}

GradientSet param_gradients(const Model& model, const Tensor& inputs, const Supervision& target, LossKind kind,
                            std::span<const double> weights) {
  return value_and_param_gradients(model, inputs, target, kind, weights).second;
}

Tensor input_gradient(const Model& model, const Tensor& inputs, const Supervision& target, LossKind kind) {
  const auto trace = model.forward_trace(inputs);
  const Tensor& logits = trace.logits();
  target.validate(kind, logits.rows(), logits.cols());
  const std::vector<double> ones(logits.rows(), 1.0);
  Tensor grad(logits.shape());
  logit_gradient(logits, target, kind, ones, grad);
  return model.backward(trace, grad, nullptr);
}

}  // namespace gair
