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
#include "gair/optim.hpp"

#include <cmath>
#include <string>

#include "gair/errors.hpp"

namespace gair {

OptimizerState OptimizerState::for_model(const Model& model, const SgdConfig& config, double learning_rate) {
  OptimizerState state;
  state.velocity = model.zero_like_params();
  state.momentum = config.momentum;
  state.weight_decay = config.weight_decay;
  state.learning_rate = learning_rate;
  return state;
}

void sgd_step(Model& model, const GradientSet& grads, OptimizerState& state) {
  auto& params = model.params();
  if (grads.size() != params.size() || state.velocity.size() != params.size()) {
    throw ConfigError("gradient / velocity sets do not match the model's parameters");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& theta = params[t];
    Tensor& v = state.velocity[t];
    const Tensor& g = grads[t];
    if (!g.same_shape(theta) || !v.same_shape(theta)) throw ConfigError("gradient shape mismatch in sgd_step");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      v[i] = state.momentum * v[i] + (g[i] + state.weight_decay * theta[i]);
      theta[i] -= state.learning_rate * v[i];
    }
  }
}

LrSchedule::LrSchedule(double initial, std::vector<Milestone> milestones)
    : initial_(initial), milestones_(std::move(milestones)) {
  if (!(initial_ > 0.0) || !std::isfinite(initial_)) throw ConfigError("initial learning rate must be positive");
  for (std::size_t i = 0; i < milestones_.size(); ++i) {
    if (milestones_[i].epoch < 0) throw ConfigError("milestone epochs must be nonnegative");
    if (!(milestones_[i].divisor > 1.0)) throw ConfigError("milestone divisors must exceed 1");
    if (i > 0 && milestones_[i].epoch <= milestones_[i - 1].epoch) {
      throw ConfigError("milestone epochs must be strictly increasing");
    }
  }
}

double LrSchedule::at(int epoch) const {
  if (epoch < 0) throw DomainError("epoch must be nonnegative, got " + std::to_string(epoch));
  double rate = initial_;
  for (const auto& m : milestones_) {
    if (m.epoch <= epoch) rate /= m.divisor;
  }
  return rate;
}

}  // namespace gair
