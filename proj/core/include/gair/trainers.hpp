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
#include <string_view>
#include <vector>

#include "gair/attacks.hpp"
#include "gair/data.hpp"
#include "gair/gradients.hpp"
#include "gair/model.hpp"
#include "gair/optim.hpp"
#include "gair/reweight.hpp"

namespace gair {

enum class TrainerKind { Gairat, GairTrades, GairMart };

/// Attack used by the Gairat trainer: GA-PGD (most adversarial data, AT /
/// GAIRAT) or early-stopped GA-PGD-K-tau (friendly data, FAT / GAIR-FAT).
enum class AttackMode { MostAdversarial, Friendly };

enum class MartVariant {
  Mart,        ///< margin + beta * KL * (1 - p_y(x))
  GairMargin,  ///< the -log p_y(x_adv) part of the margin scaled by omega
  GairKl,      ///< margin + beta * KL * omega
};

std::string_view to_string(TrainerKind kind);
std::string_view to_string(AttackMode mode);
std::string_view to_string(MartVariant variant);

/// tau in effect from `epoch` onward.
struct TauMilestone {
  int epoch = 0;
  int tau = 0;
  friend bool operator==(const TauMilestone&, const TauMilestone&) = default;
};

struct TrainerConfig {
  TrainerKind kind = TrainerKind::Gairat;
  AttackConfig attack;
  AttackMode attack_mode = AttackMode::MostAdversarial;
  std::vector<TauMilestone> tau_schedule;  ///< empty: attack.tau throughout
  WeightScheme scheme;
  double beta = 6.0;
  MartVariant mart_variant = MartVariant::GairMargin;
  int epochs = 10;
  std::size_t batch_size = 128;
  SgdConfig sgd;
  LrSchedule schedule;
  std::uint64_t seed = 0;

  /// Last scheduled tau whose epoch is <= `epoch`, else attack.tau.
  int tau_at(int epoch) const;
  void validate() const;

  friend bool operator==(const TrainerConfig&, const TrainerConfig&) = default;
};

struct EpochStats {
  double mean_loss = 0.0;
  std::vector<int> kappa;  ///< indexed by dataset row
  double train_nat_err = 0.0;  ///< natural error measured before each update
  double train_rob_err = 0.0;  ///< fraction of training attacks that fooled the model
  double wall_time_s = 0.0;
};

/// Random stream for the training attack on dataset row `index` in `epoch`.
Rng attack_stream(std::uint64_t seed, int epoch, std::size_t index);

/// Per mini-batch, GA-PGD (or early-stopped GA-PGD with the
/// scheduled tau) produces (x_adv, kappa); weights come from the effective
/// scheme, are normalized per batch, and drive one SGD step on the weighted
/// cross-entropy of the adversarial data.
EpochStats gairat_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg,
                        int epoch);

/// GAIR-TRADES: KL-guided GA-PGD, normalized weights on the natural-data
/// cross-entropy, unweighted beta * mean KL term.
EpochStats gair_trades_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg,
                             int epoch);

/// GAIR-MART: CE-guided GA-PGD, batch mean of mart_loss with raw weights.
/// During burn-in every variant trains as plain MART.
EpochStats gair_mart_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg,
                           int epoch);

/// Dispatches on cfg.kind.
EpochStats train_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg,
                       int epoch);

/// omega * CE(f(x), y) + beta * KL(softmax(f(x)) || softmax(f(x_adv))).
double trades_example_objective(std::span<const double> logits_nat, std::span<const double> logits_adv,
                                std::size_t y, double omega, double beta);

/// Scalar pieces of the MART loss for one example.
struct MartTerms {
  double ce = 0.0;       ///< -log p_y(x_adv)
  double rival = 0.0;    ///< -log(1 - max_{k != y} p_k(x_adv))
  double kl = 0.0;       ///< KL(p(x) || p(x_adv))
  double p_nat_y = 0.0;  ///< p_y(x)
};

/// Combines the terms according to the variant.
double mart_combine(const MartTerms& terms, double beta, MartVariant variant, double omega);

/// MART-family loss for one example.
double mart_loss(std::span<const double> logits_adv, std::span<const double> logits_nat, std::size_t y,
                 double beta, MartVariant variant, double omega);

/// mart_loss() together with its gradients with respect to both logit rows.
double mart_loss_gradient(std::span<const double> logits_adv, std::span<const double> logits_nat, std::size_t y,
                          double beta, MartVariant variant, double omega, std::span<double> grad_adv,
                          std::span<double> grad_nat);

/// Batch GAIR-TRADES objective
///   sum_i weights_i CE(f(x_i), y_i) + beta / m * sum_i KL(f(x_i) || f(x_adv_i)).
/// Accumulates parameter gradients into `grads` when non-null.
double trades_objective(const Model& model, const Tensor& natural, const Tensor& adversarial,
                        std::span<const std::size_t> labels, std::span<const double> weights, double beta,
                        GradientSet* grads);

/// Batch GAIR-MART objective: mean over i of mart_loss(f(x_adv_i), f(x_i), ...)
/// with omegas[i]. Accumulates parameter gradients into `grads` when non-null.
double mart_objective(const Model& model, const Tensor& natural, const Tensor& adversarial,
                      std::span<const std::size_t> labels, std::span<const double> omegas, double beta,
                      MartVariant variant, GradientSet* grads);

}  // namespace gair
