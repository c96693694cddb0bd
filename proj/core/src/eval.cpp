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
#include "gair/eval.hpp"

#include <algorithm>
#include <cmath>

#include "gair/errors.hpp"
#include "gair/gradients.hpp"
#include "gair/loss.hpp"

namespace gair {
namespace {

constexpr std::uint64_t kEvalStream = 0x4556'414cULL;

Rng example_rng(std::uint64_t seed, std::size_t index) { return Rng::derive(seed, {kEvalStream, index}); }

}  // namespace

double standard_error(const Model& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  const Tensor logits = model.forward(data.inputs);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (argmax(logits.row(i)) != data.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

double robust_error(const Model& model, const Dataset& data, const AttackConfig& cfg, std::uint64_t seed) {
  if (data.size() == 0) return 0.0;
  AttackConfig attack = cfg;
  attack.loss = LossKind::CrossEntropy;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Tensor x = data.example(i);
    const std::size_t y = data.labels[i];
    Rng rng = example_rng(seed, i);
    const bool natural_wrong = argmax(model.forward(x).row(0)) != y;
    const AttackResult res = pgd_multi_restart(model, x, y, attack, rng);
    if (natural_wrong || res.fooled) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

RobustnessReport robustness_report(const Model& model, const Dataset& data, std::span<const NamedAttack> attacks,
                                   std::uint64_t seed) {
  RobustnessReport report;
  report.n = data.size();
  report.standard_error = standard_error(model, data);
  for (const auto& a : attacks) report.robust_error.emplace_back(a.name, robust_error(model, data, a.config, seed));
  return report;
}

int lower_median(std::vector<int> values) {
  if (values.empty()) return 0;
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

GeometryProfile make_profile(std::vector<int> kappa, int steps) {
  if (steps < 1) throw DomainError("K must be at least 1");
  GeometryProfile profile;
  profile.histogram.assign(static_cast<std::size_t>(steps) + 1, 0);
  double total = 0.0;
  for (int k : kappa) {
    if (k < 0 || k > steps) throw DomainError("kappa outside [0, K]");
    ++profile.histogram[static_cast<std::size_t>(k)];
    total += k;
  }
  profile.mean = kappa.empty() ? 0.0 : total / static_cast<double>(kappa.size());
  profile.median = lower_median(kappa);
  profile.kappa = std::move(kappa);
  return profile;
}

GeometryProfile geometry_profile(const Model& model, const Dataset& data, const AttackConfig& cfg,
                                 std::uint64_t seed) {
  AttackConfig attack = cfg;
  attack.loss = LossKind::CrossEntropy;
  std::vector<int> kappa;
  kappa.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    Rng rng = example_rng(seed, i);
    kappa.push_back(ga_pgd(model, data.example(i), data.labels[i], attack, rng).kappa);
  }
  return make_profile(std::move(kappa), attack.steps);
}

double boundary_flatness(const Model& model, const Dataset& data, const AttackConfig& cfg, FlatnessMode mode,
                         std::uint64_t seed) {
  if (data.size() == 0) return 0.0;
  AttackConfig attack = cfg;
  attack.loss = LossKind::CrossEntropy;
  attack.tau = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Tensor x = data.example(i);
    const std::size_t y = data.labels[i];
    Rng rng = example_rng(seed, i);
    const AttackResult res = mode == FlatnessMode::Friendly ? ga_pgd_early_stopped(model, x, y, attack, rng)
                                                            : ga_pgd(model, x, y, attack, rng);
    const Tensor g = input_gradient(model, res.adversarial, Supervision::from_labels({y}), LossKind::CrossEntropy);
    double sq = 0.0;
    for (double v : g.data()) sq += v * v;
    total += std::sqrt(sq);
  }
  return total / static_cast<double>(data.size());
}

CheckpointChoice select_checkpoint(const CheckpointHistory& history) {
  if (history.entries.empty()) throw DomainError("cannot select a checkpoint from an empty history");
  CheckpointChoice choice;
  const CheckpointRecord* best = &history.entries.front();
  const CheckpointRecord* last = &history.entries.front();
  for (const auto& e : history.entries) {
    if (e.robust_error < best->robust_error || (e.robust_error == best->robust_error && e.epoch < best->epoch)) {
      best = &e;
    }
    if (e.epoch > last->epoch) last = &e;
  }
  choice.best_epoch = best->epoch;
  choice.last_epoch = last->epoch;
  return choice;
}

}  // namespace gair
