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
#include "gair/trainers.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "gair/errors.hpp"
#include "gair/loss.hpp"

namespace gair {
namespace {

constexpr std::uint64_t kAttackStream = 0x4154'5441'434bULL;

using AttackFn = std::function<AttackResult(const Model&, const Tensor&, std::size_t, Rng&)>;

struct AttackedBatch {
  Tensor natural;
  Tensor adversarial;
  std::vector<std::size_t> labels;
  std::vector<int> kappa;
};

using ObjectiveFn = std::function<double(const Model&, const AttackedBatch&, GradientSet&)>;

Tensor stack_rows(const std::vector<Tensor>& rows) {
  const std::size_t width = rows.front().cols();
  std::vector<double> data;
  data.reserve(rows.size() * width);
  for (const auto& r : rows) data.insert(data.end(), r.data().begin(), r.data().end());
  return Tensor({rows.size(), width}, std::move(data));
}

EpochStats run_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg, int epoch,
                     const AttackFn& attack, const ObjectiveFn& objective) {
  cfg.validate();
  data.validate();
  if (data.size() == 0) throw ConfigError("cannot train on an empty dataset");
  if (data.features() != model.input_size() || data.class_count != model.class_count()) {
    throw ConfigError("dataset and model extents disagree");
  }
  const auto started = std::chrono::steady_clock::now();

  state.learning_rate = cfg.schedule.at(epoch);
  state.momentum = cfg.sgd.momentum;
  state.weight_decay = cfg.sgd.weight_decay;

  EpochStats stats;
  stats.kappa.assign(data.size(), 0);
  std::size_t nat_errors = 0;
  std::size_t rob_errors = 0;
  double loss_total = 0.0;

  const BatchPlan plan = BatchPlan::make(data.size(), cfg.batch_size, cfg.seed, epoch);
  for (std::size_t b = 0; b < plan.batch_count(); ++b) {
    const auto indices = plan.batch(b);
    AttackedBatch batch;
    std::vector<Tensor> adversarial;
    adversarial.reserve(indices.size());
    for (std::size_t idx : indices) {
      const Tensor x = data.example(idx);
      const std::size_t y = data.labels[idx];
      if (argmax(model.forward(x).row(0)) != y) ++nat_errors;
      Rng rng = attack_stream(cfg.seed, epoch, idx);
      AttackResult res = attack(model, x, y, rng);
      if (res.fooled) ++rob_errors;
      stats.kappa[idx] = res.kappa;
      batch.kappa.push_back(res.kappa);
      batch.labels.push_back(y);
      adversarial.push_back(std::move(res.adversarial));
    }
    batch.natural = data.inputs.gather_rows(indices);
    batch.adversarial = stack_rows(adversarial);

    GradientSet grads = model.zero_like_params();
    const double value = objective(model, batch, grads);
    sgd_step(model, grads, state);
    loss_total += value * static_cast<double>(indices.size());
  }

  const auto n = static_cast<double>(data.size());
  stats.mean_loss = loss_total / n;
  stats.train_nat_err = static_cast<double>(nat_errors) / n;
  stats.train_rob_err = static_cast<double>(rob_errors) / n;
  stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return stats;
}

std::vector<double> raw_weights(const std::vector<int>& kappa, int steps, const WeightScheme& scheme) {
  std::vector<double> raw;
  raw.reserve(kappa.size());
  for (int k : kappa) raw.push_back(geometry_weight(k, steps, scheme));
  return raw;
}

}  // namespace

Rng attack_stream(std::uint64_t seed, int epoch, std::size_t index) {
  return Rng::derive(seed, {kAttackStream, static_cast<std::uint64_t>(epoch), index});
}

std::string_view to_string(TrainerKind kind) {
  switch (kind) {
    case TrainerKind::Gairat:
      return "gairat";
    case TrainerKind::GairTrades:
      return "gair_trades";
    case TrainerKind::GairMart:
      return "gair_mart";
  }
  return "unknown";
}

std::string_view to_string(AttackMode mode) {
  return mode == AttackMode::MostAdversarial ? "most_adversarial" : "friendly";
}

std::string_view to_string(MartVariant variant) {
  switch (variant) {
    case MartVariant::Mart:
      return "mart";
    case MartVariant::GairMargin:
      return "gair_margin";
    case MartVariant::GairKl:
      return "gair_kl";
  }
  return "unknown";
}

int TrainerConfig::tau_at(int epoch) const {
  int tau = attack.tau;
  for (const auto& m : tau_schedule) {
    if (m.epoch <= epoch) tau = m.tau;
  }
  return tau;
}

void TrainerConfig::validate() const {
  attack.validate();
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (scheme.burn_in_epochs < 0) throw ConfigError("burn-in epochs must be nonnegative");
  if ((kind == TrainerKind::GairTrades || kind == TrainerKind::GairMart) && !(beta > 0.0)) {
    throw ConfigError("beta must be positive for TRADES / MART trainers");
  }
  for (std::size_t i = 0; i < tau_schedule.size(); ++i) {
    if (tau_schedule[i].tau < 0 || tau_schedule[i].tau > attack.steps) {
      throw ConfigError("scheduled tau must lie in [0, K]");
    }
    if (tau_schedule[i].epoch < 0 || (i > 0 && tau_schedule[i].epoch <= tau_schedule[i - 1].epoch)) {
      throw ConfigError("tau schedule epochs must be strictly increasing");
    }
  }
}

EpochStats gairat_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg,
                        int epoch) {
  AttackConfig attack_cfg = cfg.attack;
  attack_cfg.loss = LossKind::CrossEntropy;
  attack_cfg.tau = cfg.tau_at(epoch);
  const bool friendly = cfg.attack_mode == AttackMode::Friendly;
  const WeightScheme scheme = effective_scheme(epoch, cfg.scheme);

  auto attack = [&](const Model& m, const Tensor& x, std::size_t y, Rng& rng) {
    return friendly ? ga_pgd_early_stopped(m, x, y, attack_cfg, rng) : ga_pgd(m, x, y, attack_cfg, rng);
  };
  auto objective = [&](const Model& m, const AttackedBatch& batch, GradientSet& grads) {
    const BatchWeights w = normalize_weights(raw_weights(batch.kappa, attack_cfg.steps, scheme));
    auto [value, g] = value_and_param_gradients(m, batch.adversarial, Supervision::from_labels(batch.labels),
                                                LossKind::CrossEntropy, w.normalized);
    grads = std::move(g);
    return value;
  };
  return run_epoch(model, state, data, cfg, epoch, attack, objective);
}

EpochStats gair_trades_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg,
                             int epoch) {
  AttackConfig attack_cfg = cfg.attack;
  attack_cfg.loss = LossKind::KlDivergence;
  const WeightScheme scheme = effective_scheme(epoch, cfg.scheme);

  auto attack = [&](const Model& m, const Tensor& x, std::size_t y, Rng& rng) {
    return ga_pgd_kl(m, x, y, attack_cfg, rng);
  };
  auto objective = [&](const Model& m, const AttackedBatch& batch, GradientSet& grads) {
    const BatchWeights w = normalize_weights(raw_weights(batch.kappa, attack_cfg.steps, scheme));
    return trades_objective(m, batch.natural, batch.adversarial, batch.labels, w.normalized, cfg.beta, &grads);
  };
  return run_epoch(model, state, data, cfg, epoch, attack, objective);
}

EpochStats gair_mart_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg,
                           int epoch) {
  AttackConfig attack_cfg = cfg.attack;
  attack_cfg.loss = LossKind::CrossEntropy;
  const WeightScheme scheme = effective_scheme(epoch, cfg.scheme);
  const MartVariant variant = epoch < cfg.scheme.burn_in_epochs ? MartVariant::Mart : cfg.mart_variant;

  auto attack = [&](const Model& m, const Tensor& x, std::size_t y, Rng& rng) {
    return ga_pgd(m, x, y, attack_cfg, rng);
  };
  auto objective = [&](const Model& m, const AttackedBatch& batch, GradientSet& grads) {
    const auto omegas = raw_weights(batch.kappa, attack_cfg.steps, scheme);
    return mart_objective(m, batch.natural, batch.adversarial, batch.labels, omegas, cfg.beta, variant, &grads);
  };
  return run_epoch(model, state, data, cfg, epoch, attack, objective);
}

EpochStats train_epoch(Model& model, OptimizerState& state, const Dataset& data, const TrainerConfig& cfg,
                       int epoch) {
  switch (cfg.kind) {
    case TrainerKind::Gairat:
      return gairat_epoch(model, state, data, cfg, epoch);
    case TrainerKind::GairTrades:
      return gair_trades_epoch(model, state, data, cfg, epoch);
    case TrainerKind::GairMart:
      return gair_mart_epoch(model, state, data, cfg, epoch);
  }
  throw ConfigError("unknown trainer kind");
}

double trades_example_objective(std::span<const double> logits_nat, std::span<const double> logits_adv,
                                std::size_t y, double omega, double beta) {
  return omega * cross_entropy(logits_nat, y) + beta * kl_divergence(logits_adv, logits_nat);
}

double mart_combine(const MartTerms& t, double beta, MartVariant variant, double omega) {
  const double ce_scale = variant == MartVariant::GairMargin ? omega : 1.0;
  const double kl_scale = variant == MartVariant::GairKl ? omega : 1.0 - t.p_nat_y;
  return ce_scale * t.ce + t.rival + beta * t.kl * kl_scale;
}

double mart_loss_gradient(std::span<const double> logits_adv, std::span<const double> logits_nat, std::size_t y,
                          double beta, MartVariant variant, double omega, std::span<double> grad_adv,
                          std::span<double> grad_nat) {
  const std::size_t classes = logits_adv.size();
  if (logits_nat.size() != classes) throw ConfigError("natural and adversarial logits differ in width");
  if (variant != MartVariant::Mart && !(omega >= 0.0 && omega <= 1.0)) {
    throw DomainError("omega must lie in [0, 1]");
  }
  const bool want_grad = !grad_adv.empty();
  if (want_grad && (grad_adv.size() != classes || grad_nat.size() != classes)) {
    throw ConfigError("MART gradient buffers have the wrong width");
  }

  // Split the margin into its cross-entropy part and its runner-up part.
  const double ce = cross_entropy(logits_adv, y);
  const double margin = mart_margin(logits_adv, y);
  const double rival = margin - ce;
  const double ce_scale = variant == MartVariant::GairMargin ? omega : 1.0;

  const auto p_nat = softmax(logits_nat);
  const double kl = kl_divergence(logits_adv, logits_nat);
  const double kl_scale = variant == MartVariant::GairKl ? omega : 1.0 - p_nat[y];
  const double value = mart_combine({ce, rival, kl, p_nat[y]}, beta, variant, omega);
  if (!want_grad) return value;

  std::vector<double> g_ce(classes);
  std::vector<double> g_margin(classes);
  std::vector<double> g_kl_adv(classes);
  std::vector<double> g_kl_nat(classes);
  loss_gradient(logits_adv, y, LossKind::CrossEntropy, g_ce);
  loss_gradient(logits_adv, y, LossKind::MartMargin, g_margin);
  loss_gradient(logits_adv, logits_nat, LossKind::KlDivergence, g_kl_adv);
  kl_reference_gradient(logits_adv, logits_nat, g_kl_nat);
  for (std::size_t k = 0; k < classes; ++k) {
    // d(rival) = d(margin) - d(ce)
    grad_adv[k] = ce_scale * g_ce[k] + (g_margin[k] - g_ce[k]) + beta * kl_scale * g_kl_adv[k];
    grad_nat[k] = beta * kl_scale * g_kl_nat[k];
    if (variant != MartVariant::GairKl) {
      // d(1 - p_y) / dz_k = -p_y (delta_yk - p_k)
      const double d_scale = -p_nat[y] * ((k == y ? 1.0 : 0.0) - p_nat[k]);
      grad_nat[k] += beta * kl * d_scale;
    }
  }
  return value;
}

double mart_loss(std::span<const double> logits_adv, std::span<const double> logits_nat, std::size_t y,
                 double beta, MartVariant variant, double omega) {
  return mart_loss_gradient(logits_adv, logits_nat, y, beta, variant, omega, {}, {});
}

double trades_objective(const Model& model, const Tensor& natural, const Tensor& adversarial,
                        std::span<const std::size_t> labels, std::span<const double> weights, double beta,
                        GradientSet* grads) {
  const std::size_t m = labels.size();
  if (natural.rows() != m || adversarial.rows() != m || weights.size() != m) {
    throw ConfigError("TRADES batch pieces disagree in length");
  }
  const auto nat_trace = model.forward_trace(natural);
  const auto adv_trace = model.forward_trace(adversarial);
  const Tensor& zn = nat_trace.logits();
  const Tensor& za = adv_trace.logits();
  Tensor g_nat(zn.shape());
  Tensor g_adv(za.shape());
  const double kl_scale = beta / static_cast<double>(m);
  std::vector<double> tmp(model.class_count());
  double value = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto gn = g_nat.row(i);
    auto ga = g_adv.row(i);
    value += weights[i] * loss_gradient(zn.row(i), labels[i], LossKind::CrossEntropy, gn);
    for (double& v : gn) v *= weights[i];
    value += kl_scale * loss_gradient(za.row(i), zn.row(i), LossKind::KlDivergence, ga);
    for (double& v : ga) v *= kl_scale;
    kl_reference_gradient(za.row(i), zn.row(i), tmp);
    for (std::size_t k = 0; k < tmp.size(); ++k) gn[k] += kl_scale * tmp[k];
  }
  if (grads != nullptr) {
    model.backward(nat_trace, g_nat, grads);
    model.backward(adv_trace, g_adv, grads);
  }
  return value;
}

double mart_objective(const Model& model, const Tensor& natural, const Tensor& adversarial,
                      std::span<const std::size_t> labels, std::span<const double> omegas, double beta,
                      MartVariant variant, GradientSet* grads) {
  const std::size_t m = labels.size();
  if (natural.rows() != m || adversarial.rows() != m || omegas.size() != m) {
    throw ConfigError("MART batch pieces disagree in length");
  }
  const auto nat_trace = model.forward_trace(natural);
  const auto adv_trace = model.forward_trace(adversarial);
  const Tensor& zn = nat_trace.logits();
  const Tensor& za = adv_trace.logits();
  Tensor g_nat(zn.shape());
  Tensor g_adv(za.shape());
  const double scale = 1.0 / static_cast<double>(m);
  double value = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto gn = g_nat.row(i);
    auto ga = g_adv.row(i);
    value += scale * mart_loss_gradient(za.row(i), zn.row(i), labels[i], beta, variant, omegas[i], ga, gn);
    for (double& v : ga) v *= scale;
    for (double& v : gn) v *= scale;
  }
  if (grads != nullptr) {
    model.backward(nat_trace, g_nat, grads);
    model.backward(adv_trace, g_adv, grads);
  }
  return value;
}

}  // namespace gair
