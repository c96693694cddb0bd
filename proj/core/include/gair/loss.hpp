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
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "gair/tensor.hpp"

namespace gair {

/// Loss applied on top of softmax probabilities.
enum class LossKind {
  CrossEntropy,  ///< -log p_y
  KlDivergence,  ///< KL(softmax(reference) || softmax(logits))
  MartMargin,    ///< -log p_y - log(1 - max_{k != y} p_k)
};

std::string_view to_string(LossKind kind);

/// Per-example supervision: a class label, or the reference logits a
/// KlDivergence loss is measured against.
using Target = std::variant<std::size_t, std::span<const double>>;

double log_sum_exp(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);

/// Index of the largest score; the lowest index wins ties.
std::size_t argmax(std::span<const double> scores);

/// Largest class other than `label` (lowest index on ties).
std::size_t runner_up(std::span<const double> scores, std::size_t label);

double cross_entropy(std::span<const double> logits, std::size_t label);
double kl_divergence(std::span<const double> logits, std::span<const double> reference);
double mart_margin(std::span<const double> logits, std::size_t label);

/// Loss value for one example; validates the target against the kind.
double loss_value(std::span<const double> logits, const Target& target, LossKind kind);

/// Writes dLoss/dlogits into `grad` and returns the loss value.
double loss_gradient(std::span<const double> logits, const Target& target, LossKind kind, std::span<double> grad);

/// d KL(softmax(reference) || softmax(logits)) / d reference.
void kl_reference_gradient(std::span<const double> logits, std::span<const double> reference,
                           std::span<double> grad);

/// Batch-level supervision: labels for CrossEntropy and MartMargin, reference
/// logits [batch, C] for KlDivergence. Both may be present.
struct Supervision {
  std::vector<std::size_t> labels;
  Tensor reference;

  static Supervision from_labels(std::vector<std::size_t> labels) { return {std::move(labels), {}}; }
  static Supervision from_reference(Tensor reference) { return {{}, std::move(reference)}; }

  Target at(std::size_t i, LossKind kind) const;
  /// Throws ConfigError / DomainError when this supervision cannot drive
  /// `kind` on a batch of `batch` examples with `classes` scores each.
  void validate(LossKind kind, std::size_t batch, std::size_t classes) const;
};

}  // namespace gair
