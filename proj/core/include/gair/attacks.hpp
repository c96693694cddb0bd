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
#include <optional>

#include "gair/loss.hpp"
#include "gair/model.hpp"
#include "gair/rng.hpp"
#include "gair/tensor.hpp"

namespace gair {

/// Closed coordinate box, [0, 1] for normalized images.
struct Box {
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const Box&, const Box&) = default;
};

enum class RandomStart {
  None,
  Uniform,   ///< x + U[-eps, eps] per coordinate
  Gaussian,  ///< x + xi * N(0, I)
};

/// Everything an L-infinity PGD-family attack needs.
struct AttackConfig {
  double epsilon = 8.0 / 255.0;
  double alpha = 2.0 / 255.0;
  int steps = 10;  ///< maximum iteration count K
  int tau = 0;     ///< extra steps after the first misclassification (early-stopped variant)
  int restarts = 1;
  RandomStart random_start = RandomStart::None;
  double xi = 0.001;
  LossKind loss = LossKind::CrossEntropy;
  std::optional<Box> clamp_box;

  /// Throws ConfigError unless 0 < alpha, 0 <= eps, K >= 1, 0 <= tau <= K,
  /// restarts >= 1 and xi >= 0.
  void validate() const;

  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

/// Outcome of one attack on one example.
struct AttackResult {
  Tensor adversarial;
  int kappa = 0;               ///< geometry value, 0 <= kappa <= K
  bool fooled = false;         ///< final iterate misclassified
  std::size_t iterations = 0;  ///< perturbation steps taken, summed over restarts
};

/// Coordinate-wise clamp into [anchor - eps, anchor + eps], then into `box`.
Tensor project_linf(const Tensor& candidate, const Tensor& anchor, double eps, const std::optional<Box>& box);

// All attacks take a single example `x` shaped [1, features] with label `y`.
// `rng` is only consumed by random starts.

/// Fixed-K PGD; returns the final iterate.
AttackResult pgd(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg, Rng& rng);

/// Geometry-aware PGD: before each of the K perturbations, kappa is bumped if
/// the current iterate is still classified as y.
AttackResult ga_pgd(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg, Rng& rng);

/// Geometry-aware early-stopped PGD-K-tau: once the iterate is misclassified
/// the attack takes at most cfg.tau further steps.
AttackResult ga_pgd_early_stopped(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg,
                                  Rng& rng);

/// Geometry-aware PGD for TRADES: Gaussian start of scale xi, ascent on
/// KL(softmax(f(x)) || softmax(f(x_adv))); kappa counted against label y.
AttackResult ga_pgd_kl(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg, Rng& rng);

/// PGD with cfg.restarts independent starts. All restarts always run; the
/// first fooling restart is returned, otherwise the final iterate with the
/// largest cross-entropy.
AttackResult pgd_multi_restart(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg,
                               Rng& rng);

}  // namespace gair
