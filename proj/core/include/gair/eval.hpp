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
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gair/attacks.hpp"
#include "gair/data.hpp"
#include "gair/model.hpp"

namespace gair {

struct NamedAttack {
  std::string name;
  AttackConfig config;
  friend bool operator==(const NamedAttack&, const NamedAttack&) = default;
};

struct RobustnessReport {
  double standard_error = 0.0;
  std::vector<std::pair<std::string, double>> robust_error;
  std::size_t n = 0;
};

/// Fraction of examples whose argmax differs from the label; 0 for an empty
/// dataset.
double standard_error(const Model& model, const Dataset& data);

/// Fraction of examples the attack defeats. An example counts as defeated when
/// the natural point is already misclassified or the attack's returned iterate
/// is misclassified. Runs pgd_multi_restart (cfg.restarts = 1 is plain PGD)
/// with per-example random streams derived from `seed`.
double robust_error(const Model& model, const Dataset& data, const AttackConfig& cfg, std::uint64_t seed = 0);

RobustnessReport robustness_report(const Model& model, const Dataset& data, std::span<const NamedAttack> attacks,
                                   std::uint64_t seed = 0);

struct GeometryProfile {
  std::vector<int> kappa;
  double mean = 0.0;
  int median = 0;  ///< lower middle element for even lengths
  std::vector<std::size_t> histogram;  ///< counts for kappa = 0..K
};

/// Lower median of a list of integers (0 for an empty list).
int lower_median(std::vector<int> values);

/// Aggregates a kappa list; histogram has K + 1 bins.
GeometryProfile make_profile(std::vector<int> kappa, int steps);

/// kappa of every example under ga_pgd with `cfg`.
GeometryProfile geometry_profile(const Model& model, const Dataset& data, const AttackConfig& cfg,
                                 std::uint64_t seed = 0);

enum class FlatnessMode {
  Friendly,         ///< early-stopped GA-PGD with tau = 0
  MostAdversarial,  ///< fixed-K GA-PGD
};

/// Mean over examples of || d CE(f(x_adv), y) / d x_adv ||_2.
double boundary_flatness(const Model& model, const Dataset& data, const AttackConfig& cfg, FlatnessMode mode,
                         std::uint64_t seed = 0);

struct CheckpointRecord {
  std::string snapshot;
  double robust_error = 0.0;
  int epoch = 0;
};

struct CheckpointHistory {
  std::vector<CheckpointRecord> entries;
};

struct CheckpointChoice {
  int best_epoch = 0;
  int last_epoch = 0;
};

/// best = lowest robust error (earliest epoch on ties), last = latest epoch.
/// Throws DomainError on an empty history.
CheckpointChoice select_checkpoint(const CheckpointHistory& history);

}  // namespace gair
