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
#include "gair/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "gair/errors.hpp"

namespace gair {
namespace {

enum class StopRule { FixedK, EarlyStopped };

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_example(const Model& model, const Tensor& x, std::size_t y) {
  if (x.rank() < 2 || x.rows() != 1) throw ConfigError("attacks expect a single example shaped [1, features]");
  if (x.cols() != model.input_size()) throw ConfigError("example width does not match the model");
  if (y >= model.class_count()) throw DomainError("label out of range");
}

Tensor random_start(const Tensor& x, const AttackConfig& cfg, Rng& rng) {
  Tensor start = x;
  switch (cfg.random_start) {
    case RandomStart::None:
      return start;
    case RandomStart::Uniform:
      for (double& v : start.data()) v += rng.uniform(-cfg.epsilon, cfg.epsilon);
      break;
    case RandomStart::Gaussian:
      for (double& v : start.data()) v += cfg.xi * rng.normal();
      break;
  }
  return project_linf(start, x, cfg.epsilon, cfg.clamp_box);
}

struct Step {
  std::size_t prediction;
  Tensor gradient;
};

Step predict_and_differentiate(const Model& model, const Tensor& xt, const Target& target, LossKind kind) {
  const auto trace = model.forward_trace(xt);
  const auto logits = trace.logits().row(0);
  Tensor g(trace.logits().shape());
  loss_gradient(logits, target, kind, g.row(0));
  return {argmax(logits), model.backward(trace, g, nullptr)};
}

AttackResult run(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg, Rng& rng,
                 StopRule rule) {
  cfg.validate();
  check_example(model, x, y);

  Tensor reference;
  Target target = y;
  if (cfg.loss == LossKind::KlDivergence) {
    reference = model.forward(x);
    target = reference.row(0);
  }

  AttackResult result;
  Tensor xt = random_start(x, cfg, rng);
  int tau = cfg.tau;
  for (int k = 0; k < cfg.steps; ++k) {
    Step step = predict_and_differentiate(model, xt, target, cfg.loss);
    if (step.prediction != y) {
      if (rule == StopRule::EarlyStopped) {
        if (tau == 0) break;
        --tau;
      }
    } else {
      ++result.kappa;
    }
    for (std::size_t i = 0; i < xt.size(); ++i) xt[i] += cfg.alpha * sign(step.gradient[i]);
    xt = project_linf(xt, x, cfg.epsilon, cfg.clamp_box);
    ++result.iterations;
  }
  result.fooled = argmax(model.forward(xt).row(0)) != y;
  result.adversarial = std::move(xt);
  return result;
}

void require_loss(const AttackConfig& cfg, LossKind kind, const char* attack) {
  if (cfg.loss != kind) {
    throw ConfigError(std::string(attack) + " requires loss " + std::string(to_string(kind)) + ", got " +
                      std::string(to_string(cfg.loss)));
  }
}

}  // namespace

void AttackConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("attack step size alpha must be positive");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("attack radius epsilon must be nonnegative");
  if (steps < 1) throw ConfigError("attack step count K must be at least 1");
  if (tau < 0 || tau > steps) throw ConfigError("tau must lie in [0, K]");
  if (restarts < 1) throw ConfigError("restart count must be at least 1");
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw ConfigError("xi must be nonnegative");
  if (clamp_box && !(clamp_box->lo <= clamp_box->hi)) throw ConfigError("clamp box must satisfy lo <= hi");
}

Tensor project_linf(const Tensor& candidate, const Tensor& anchor, double eps, const std::optional<Box>& box) {
  if (!candidate.same_shape(anchor)) throw ConfigError("projection shape mismatch");
  Tensor out = candidate;
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Rounded a +- eps can sit one ulp outside the ball; pull the bounds in.
    const double a = anchor[i];
    double lo = a - eps;
    double hi = a + eps;
    while (a - lo > eps) lo = std::nextafter(lo, a);
    while (hi - a > eps) hi = std::nextafter(hi, a);
    double v = std::clamp(out[i], lo, hi);
    if (box) v = std::clamp(v, box->lo, box->hi);
    out[i] = v;
  }
  return out;
}

AttackResult pgd(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg, Rng& rng) {
  require_loss(cfg, LossKind::CrossEntropy, "pgd");
  return run(model, x, y, cfg, rng, StopRule::FixedK);
}

AttackResult ga_pgd(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg, Rng& rng) {
  require_loss(cfg, LossKind::CrossEntropy, "ga_pgd");
  return run(model, x, y, cfg, rng, StopRule::FixedK);
}

AttackResult ga_pgd_early_stopped(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg,
                                  Rng& rng) {
  require_loss(cfg, LossKind::CrossEntropy, "ga_pgd_early_stopped");
  return run(model, x, y, cfg, rng, StopRule::EarlyStopped);
}

AttackResult ga_pgd_kl(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg, Rng& rng) {
  require_loss(cfg, LossKind::KlDivergence, "ga_pgd_kl");
  AttackConfig gaussian = cfg;
  gaussian.random_start = RandomStart::Gaussian;
  return run(model, x, y, gaussian, rng, StopRule::FixedK);
}

AttackResult pgd_multi_restart(const Model& model, const Tensor& x, std::size_t y, const AttackConfig& cfg,
                               Rng& rng) {
  require_loss(cfg, LossKind::CrossEntropy, "pgd_multi_restart");
  cfg.validate();
  std::optional<AttackResult> chosen;
  double chosen_loss = 0.0;
  std::size_t total_iterations = 0;
  for (int r = 0; r < cfg.restarts; ++r) {
    AttackResult attempt = pgd(model, x, y, cfg, rng);
    total_iterations += attempt.iterations;
    if (chosen && chosen->fooled) continue;
    const double loss = cross_entropy(model.forward(attempt.adversarial).row(0), y);
    if (!chosen || attempt.fooled || loss > chosen_loss) {
      chosen_loss = loss;
      chosen = std::move(attempt);
    }
  }
  chosen->iterations = total_iterations;
  return std::move(*chosen);
}

}  // namespace gair
