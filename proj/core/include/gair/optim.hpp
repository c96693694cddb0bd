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

#include <vector>

#include "gair/gradients.hpp"
#include "gair/model.hpp"

namespace gair {

/// SGD hyperparameters other than the (scheduled) learning rate.
struct SgdConfig {
  double momentum = 0.9;
  double weight_decay = 2e-4;
  friend bool operator==(const SgdConfig&, const SgdConfig&) = default;
};

/// Momentum buffers plus the hyperparameters currently in effect.
struct OptimizerState {
  std::vector<Tensor> velocity;
  double momentum = 0.9;
  double weight_decay = 0.0;
  double learning_rate = 0.1;

  /// Zero velocity buffers shaped like the model's parameters.
  static OptimizerState for_model(const Model& model, const SgdConfig& config, double learning_rate);

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

/// Classical momentum with coupled weight decay:
///   v <- mu * v + (g + wd * theta);  theta <- theta - lr * v
void sgd_step(Model& model, const GradientSet& grads, OptimizerState& state);

/// Piecewise-constant learning rate: the initial rate divided by every
/// milestone divisor whose epoch has been reached (epochs are 0-based).
class LrSchedule {
 public:
  struct Milestone {
    int epoch = 0;
    double divisor = 10.0;
    friend bool operator==(const Milestone&, const Milestone&) = default;
  };

  LrSchedule() = default;
  explicit LrSchedule(double initial, std::vector<Milestone> milestones = {});

  double initial() const noexcept { return initial_; }
  const std::vector<Milestone>& milestones() const noexcept { return milestones_; }

  double at(int epoch) const;

  friend bool operator==(const LrSchedule&, const LrSchedule&) = default;

 private:
  double initial_ = 0.1;
  std::vector<Milestone> milestones_;
};

inline double lr_at(const LrSchedule& schedule, int epoch) { return schedule.at(epoch); }

}  // namespace gair
