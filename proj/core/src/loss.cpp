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
#include "gair/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gair/errors.hpp"

namespace gair {
namespace {

void check_finite(std::span<const double> logits) {
  for (double v : logits) {
    if (!std::isfinite(v)) throw DomainError("logits must be finite");
  }
}

void check_label(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    throw DomainError("label " + std::to_string(label) + " out of range for " + std::to_string(logits.size()) +
                      " classes");
  }
}

std::size_t label_of(const Target& target) {
  const auto* label = std::get_if<std::size_t>(&target);
  if (label == nullptr) throw ConfigError("loss kind requires an integer label");
  return *label;
}

std::span<const double> reference_of(const Target& target, std::size_t classes) {
  const auto* ref = std::get_if<std::span<const double>>(&target);
  if (ref == nullptr) throw ConfigError("KL divergence requires reference logits");
  if (ref->size() != classes) throw ConfigError("reference logits have the wrong width");
  check_finite(*ref);
  return *ref;
}

// log of the softmax mass outside class `skip`.
double log_mass_without(std::span<const double> logits, std::size_t skip) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (k != skip) top = std::max(top, logits[k]);
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (k != skip) acc += std::exp(logits[k] - top);
  }
  return top + std::log(acc);
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::CrossEntropy:
      return "cross_entropy";
    case LossKind::KlDivergence:
      return "kl_divergence";
    case LossKind::MartMargin:
      return "mart_margin";
  }
  return "unknown";
}

double log_sum_exp(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double acc = 0.0;
  for (double v : logits) acc += std::exp(v - top);
  return top + std::log(acc);
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - top);
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

std::size_t runner_up(std::span<const double> scores, std::size_t label) {
  std::size_t best = label == 0 ? 1 : 0;
  for (std::size_t k = best + 1; k < scores.size(); ++k) {
    if (k != label && scores[k] > scores[best]) best = k;
  }
  return best;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  check_finite(logits);
  check_label(logits, label);
  return log_sum_exp(logits) - logits[label];
}

double kl_divergence(std::span<const double> logits, std::span<const double> reference) {
  check_finite(logits);
  if (reference.size() != logits.size()) throw ConfigError("reference logits have the wrong width");
  check_finite(reference);
  const auto log_q = log_softmax(logits);
  const auto log_p = log_softmax(reference);
  double acc = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) acc += std::exp(log_p[k]) * (log_p[k] - log_q[k]);
  return std::max(acc, 0.0);
}

double mart_margin(std::span<const double> logits, std::size_t label) {
  check_finite(logits);
  check_label(logits, label);
  const double lse = log_sum_exp(logits);
  const std::size_t other = runner_up(logits, label);
  return (lse - logits[label]) + (lse - log_mass_without(logits, other));
}

double loss_value(std::span<const double> logits, const Target& target, LossKind kind) {
  switch (kind) {
    case LossKind::CrossEntropy:
      return cross_entropy(logits, label_of(target));
    case LossKind::KlDivergence:
      return kl_divergence(logits, reference_of(target, logits.size()));
    case LossKind::MartMargin:
      return mart_margin(logits, label_of(target));
  }
  throw ConfigError("unknown loss kind");
}

double loss_gradient(std::span<const double> logits, const Target& target, LossKind kind, std::span<double> grad) {
  if (grad.size() != logits.size()) throw ConfigError("gradient buffer has the wrong width");
  const double value = loss_value(logits, target, kind);
  const auto p = softmax(logits);
  switch (kind) {
    case LossKind::CrossEntropy: {
      const std::size_t y = label_of(target);
      for (std::size_t k = 0; k < p.size(); ++k) grad[k] = p[k] - (k == y ? 1.0 : 0.0);
      break;
    }
    case LossKind::KlDivergence: {
      const auto ref = softmax(reference_of(target, logits.size()));
      for (std::size_t k = 0; k < p.size(); ++k) grad[k] = p[k] - ref[k];
      break;
    }
    case LossKind::MartMargin: {
      // -log p_y contributes p - e_y; -log(1 - p_m) contributes p minus the
      // softmax restricted to classes other than m.
      const std::size_t y = label_of(target);
      const std::size_t m = runner_up(logits, y);
      const double lse_rest = log_mass_without(logits, m);
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double rest = k == m ? 0.0 : std::exp(logits[k] - lse_rest);
        grad[k] = 2.0 * p[k] - (k == y ? 1.0 : 0.0) - rest;
      }
      break;
    }
  }
  return value;
}

void kl_reference_gradient(std::span<const double> logits, std::span<const double> reference,
                           std::span<double> grad) {
  if (grad.size() != logits.size() || reference.size() != logits.size()) {
    throw ConfigError("KL gradient buffers have mismatched widths");
  }
  const auto log_q = log_softmax(logits);
  const auto log_p = log_softmax(reference);
  double kl = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) kl += std::exp(log_p[k]) * (log_p[k] - log_q[k]);
  for (std::size_t k = 0; k < logits.size(); ++k) grad[k] = std::exp(log_p[k]) * ((log_p[k] - log_q[k]) - kl);
}

Target Supervision::at(std::size_t i, LossKind kind) const {
  if (kind == LossKind::KlDivergence) return reference.row(i);
  return labels.at(i);
}

void Supervision::validate(LossKind kind, std::size_t batch, std::size_t classes) const {
  if (kind == LossKind::KlDivergence) {
    if (reference.rank() != 2 || reference.rows() != batch || reference.cols() != classes) {
      throw ConfigError("KL divergence needs reference logits shaped [batch, classes]");
    }
    return;
  }
  if (labels.size() != batch) throw ConfigError("label count does not match batch size");
  for (std::size_t y : labels) {
    if (y >= classes) throw DomainError("label " + std::to_string(y) + " out of range");
  }
}

}  // namespace gair
