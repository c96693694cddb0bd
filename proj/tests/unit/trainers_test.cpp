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
#include <gtest/gtest.h>

#include <cmath>

#include "gair/errors.hpp"
#include "gair/trainers.hpp"
#include "oracles.hpp"

namespace gair {
namespace {

Dataset toy(std::uint64_t seed, std::size_t n_per_class = 20) {
  return gen_gaussian_blobs(seed, n_per_class, {Point2{-1, 0}, Point2{1, 0}}, 0.6);
}

TrainerConfig base_config(TrainerKind kind) {
  TrainerConfig c;
  c.kind = kind;
  c.attack.epsilon = 0.3;
  c.attack.alpha = 0.1;
  c.attack.steps = 5;
  c.attack.random_start = RandomStart::Uniform;
  c.batch_size = 8;
  c.epochs = 3;
  c.schedule = LrSchedule(0.05);
  c.seed = 17;
  return c;
}

double max_param_diff(const Model& a, const Model& b) {
  double d = 0;
  for (std::size_t t = 0; t < a.params().size(); ++t) d = std::max(d, max_abs_diff(a.params()[t], b.params()[t]));
  return d;
}

TEST(Gairat, ConstantSchemeIsPlainAdversarialTraining) {
  const Dataset data = toy(1);
  auto cfg = base_config(TrainerKind::Gairat);
  cfg.scheme.family = WeightFamily::Constant;
  Rng init(3);
  Model m = Model::initialized({Dense{2, 8}, Relu{}, Dense{8, 2}}, init);
  Model ref = m;
  auto state = OptimizerState::for_model(m, cfg.sgd, cfg.schedule.at(0));
  auto velocity = ref.zero_like_params();
  for (int e = 0; e < 2; ++e) {
    gairat_epoch(m, state, data, cfg, e);
    oracle::reference_at_epoch(ref, velocity, data, cfg.attack, cfg.batch_size, cfg.seed, e, cfg.schedule.at(e),
                               cfg.sgd.momentum, cfg.sgd.weight_decay,
                               [&](std::size_t i) { return attack_stream(cfg.seed, e, i); });
    EXPECT_LE(max_param_diff(m, ref), 1e-12) << "epoch " << e;
  }
}

TEST(Gairat, BurnInMatchesConstantScheme) {
  const Dataset data = toy(2);
  auto cfg = base_config(TrainerKind::Gairat);
  cfg.scheme = {WeightFamily::Tanh, -1.0, 5};
  auto constant = cfg;
  constant.scheme = {WeightFamily::Constant, 0.0, 0};
  Rng init(4);
  Model a = Model::initialized({Dense{2, 6}, Relu{}, Dense{6, 2}}, init);
  Model b = a;
  auto sa = OptimizerState::for_model(a, cfg.sgd, 0.05);
  auto sb = sa;
  gairat_epoch(a, sa, data, cfg, 0);
  gairat_epoch(b, sb, data, constant, 0);
  EXPECT_EQ(a, b);
}

TEST(Gairat, ReweightingChangesTheUpdateAfterBurnIn) {
  const Dataset data = toy(3);
  auto cfg = base_config(TrainerKind::Gairat);
  cfg.scheme = {WeightFamily::Tanh, 0.0, 0};
  auto constant = cfg;
  constant.scheme.family = WeightFamily::Constant;
  Rng init(5);
  Model a = Model::initialized({Dense{2, 6}, Relu{}, Dense{6, 2}}, init);
  Model b = a;
  auto sa = OptimizerState::for_model(a, cfg.sgd, 0.05);
  auto sb = sa;
  const auto stats = gairat_epoch(a, sa, data, cfg, 0);
  gairat_epoch(b, sb, data, constant, 0);
  EXPECT_GT(max_param_diff(a, b), 1e-8);
  ASSERT_EQ(stats.kappa.size(), data.size());
  for (int k : stats.kappa) {
    EXPECT_GE(k, 0);
    EXPECT_LE(k, cfg.attack.steps);
  }
}

TEST(Gairat, FriendlyModeFollowsTauSchedule) {
  auto cfg = base_config(TrainerKind::Gairat);
  cfg.attack_mode = AttackMode::Friendly;
  cfg.attack.tau = 0;
  cfg.tau_schedule = {{1, 1}, {2, 3}};
  EXPECT_EQ(cfg.tau_at(0), 0);
  EXPECT_EQ(cfg.tau_at(1), 1);
  EXPECT_EQ(cfg.tau_at(7), 3);
  const Dataset data = toy(4);
  Rng init(6);
  Model m = Model::initialized({Dense{2, 6}, Relu{}, Dense{6, 2}}, init);
  auto state = OptimizerState::for_model(m, cfg.sgd, 0.05);
  for (int e = 0; e < 3; ++e) EXPECT_TRUE(std::isfinite(gairat_epoch(m, state, data, cfg, e).mean_loss));
  cfg.tau_schedule = {{1, 9}};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Trades, ExampleObjectiveClosedForm) {
  const std::vector<double> nat{std::log(0.7), std::log(0.2), std::log(0.1)};
  const std::vector<double> adv{std::log(0.4), std::log(0.4), std::log(0.2)};
  const double kl = 0.7 * std::log(0.7 / 0.4) + 0.2 * std::log(0.2 / 0.4) + 0.1 * std::log(0.1 / 0.2);
  const double want = 0.3 * -std::log(0.7) + 6.0 * kl;
  EXPECT_NEAR(trades_example_objective(nat, adv, 0, 0.3, 6.0), want, 1e-12);
}

struct Pair {
  Model model;
  Tensor nat;
  Tensor adv;
  std::vector<std::size_t> labels;
};

Pair random_pair(std::uint64_t seed) {
  Rng rng(seed);
  Pair p{oracle::random_mlp(rng, 3, {5}, 3), Tensor({4, 3}), Tensor({4, 3}), {0, 1, 2, 1}};
  for (double& v : p.nat.data()) v = rng.normal();
  for (std::size_t i = 0; i < p.adv.size(); ++i) p.adv[i] = p.nat[i] + rng.uniform(-0.2, 0.2);
  return p;
}

TEST(Trades, BatchObjectiveValueAndGradient) {
  Pair p = random_pair(21);
  const std::vector<double> w{0.1, 0.4, 0.3, 0.2};
  const double beta = 6.0;
  GradientSet g = p.model.zero_like_params();
  const double value = trades_objective(p.model, p.nat, p.adv, p.labels, w, beta, &g);
  auto oracle_value = [&] {
    const Tensor zn = p.model.forward(p.nat), za = p.model.forward(p.adv);
    double s = 0;
    for (std::size_t i = 0; i < 4; ++i) s += w[i] * oracle::ce(zn.row(i), p.labels[i]) + beta / 4 * oracle::kl(za.row(i), zn.row(i));
    return s;
  };
  EXPECT_NEAR(value, oracle_value(), 1e-12);
  for (std::size_t t = 0; t < g.size(); ++t) {
    const auto fd = oracle::central_difference(p.model.params()[t].data(), oracle_value);
    EXPECT_LT(oracle::relative_error(g[t].data(), fd), 1e-5);
  }
}

TEST(Trades, ZeroBetaIsWeightedCrossEntropy) {
  Pair p = random_pair(22);
  const std::vector<double> w{0.25, 0.25, 0.4, 0.1};
  GradientSet g = p.model.zero_like_params();
  trades_objective(p.model, p.nat, p.adv, p.labels, w, 0.0, &g);
  const auto ce = param_gradients(p.model, p.nat, Supervision::from_labels(p.labels), LossKind::CrossEntropy, w);
  for (std::size_t t = 0; t < g.size(); ++t) EXPECT_LE(max_abs_diff(g[t], ce[t]), 1e-15);
}

TEST(Mart, WorkedExample) {
  // p_y(x_adv) = 0.5, largest other 0.3, KL = 0.1, beta = 6, p_y(x) = 0.8
  const MartTerms t{-std::log(0.5), -std::log(0.7), 0.1, 0.8};
  const double want = -std::log(0.5) - std::log(0.7) + 6.0 * 0.1 * 0.2;
  EXPECT_NEAR(mart_combine(t, 6.0, MartVariant::Mart, 0.4), want, 1e-12);
  EXPECT_NEAR(want, 1.16982, 1e-5);
}

TEST(Mart, LossMatchesProbabilityOracle) {
  // realizable inputs: logits are log-probabilities
  const std::vector<double> pa{0.5, 0.3, 0.2}, pn{0.6, 0.3, 0.1};
  std::vector<double> za, zn;
  for (double v : pa) za.push_back(std::log(v));
  for (double v : pn) zn.push_back(std::log(v));
  double kl = 0;
  for (int k = 0; k < 3; ++k) kl += pn[k] * std::log(pn[k] / pa[k]);
  const double beta = 6.0, omega = 0.35;
  const double ce = -std::log(0.5), rival = -std::log(0.7);
  EXPECT_NEAR(mart_loss(za, zn, 0, beta, MartVariant::Mart, omega), ce + rival + beta * kl * 0.4, 1e-12);
  EXPECT_NEAR(mart_loss(za, zn, 0, beta, MartVariant::GairMargin, omega), omega * ce + rival + beta * kl * 0.4,
              1e-12);
  EXPECT_NEAR(mart_loss(za, zn, 0, beta, MartVariant::GairKl, omega), ce + rival + beta * kl * omega, 1e-12);
}

TEST(Mart, VariantIdentities) {
  Rng rng(30);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> za(4), zn(4);
    for (auto& v : za) v = rng.normal();
    for (auto& v : zn) v = rng.normal();
    const std::size_t y = rng.below(4);
    const double plain = mart_loss(za, zn, y, 6.0, MartVariant::Mart, 0.0);
    EXPECT_EQ(plain, mart_loss(za, zn, y, 6.0, MartVariant::Mart, 0.9));
    EXPECT_NEAR(mart_loss(za, zn, y, 6.0, MartVariant::GairMargin, 1.0), plain, 1e-14);
    EXPECT_NEAR(mart_loss(za, zn, y, 0.0, MartVariant::Mart, 0.0), oracle::mart_margin(za, y), 1e-12);
  }
  const std::vector<double> confident{40.0, 0.0, 0.0};
  EXPECT_LT(mart_loss(confident, confident, 0, 6.0, MartVariant::Mart, 1.0), 1e-15);
  EXPECT_THROW(mart_loss(confident, confident, 0, 6.0, MartVariant::GairKl, 1.5), DomainError);
}

TEST(Mart, BatchGradientMatchesFiniteDifferences) {
  for (auto variant : {MartVariant::Mart, MartVariant::GairMargin, MartVariant::GairKl}) {
    Pair p = random_pair(40 + static_cast<int>(variant));
    const std::vector<double> omegas{0.9, 0.2, 0.5, 1.0};
    GradientSet g = p.model.zero_like_params();
    const double value = mart_objective(p.model, p.nat, p.adv, p.labels, omegas, 6.0, variant, &g);
    auto f = [&] { return mart_objective(p.model, p.nat, p.adv, p.labels, omegas, 6.0, variant, nullptr); };
    EXPECT_EQ(value, f());
    for (std::size_t t = 0; t < g.size(); ++t) {
      const auto fd = oracle::central_difference(p.model.params()[t].data(), f);
      EXPECT_LT(oracle::relative_error(g[t].data(), fd), 1e-5) << to_string(variant);
    }
  }
}

TEST(Mart, BurnInTrainsAsPlainMart) {
  const Dataset data = toy(5);
  auto cfg = base_config(TrainerKind::GairMart);
  cfg.scheme = {WeightFamily::Tanh, 0.0, 2};
  cfg.mart_variant = MartVariant::GairKl;
  auto plain = cfg;
  plain.mart_variant = MartVariant::Mart;
  Rng init(7);
  Model a = Model::initialized({Dense{2, 6}, Relu{}, Dense{6, 2}}, init);
  Model b = a;
  auto sa = OptimizerState::for_model(a, cfg.sgd, 0.05);
  auto sb = sa;
  gair_mart_epoch(a, sa, data, cfg, 0);
  gair_mart_epoch(b, sb, data, plain, 0);
  EXPECT_EQ(a, b);
}

TEST(Trainers, EveryKindReducesTrainingLoss) {
  const Dataset data = toy(6, 40);
  for (auto kind : {TrainerKind::Gairat, TrainerKind::GairTrades, TrainerKind::GairMart}) {
    auto cfg = base_config(kind);
    cfg.attack.epsilon = 0.1;
    cfg.attack.alpha = 0.03;
    cfg.beta = 1.0;
    Rng init(8);
    Model m = Model::initialized({Dense{2, 16}, Relu{}, Dense{16, 2}}, init);
    auto state = OptimizerState::for_model(m, cfg.sgd, 0.05);
    const double first = train_epoch(m, state, data, cfg, 0).mean_loss;
    double last = first;
    for (int e = 1; e < 6; ++e) last = train_epoch(m, state, data, cfg, e).mean_loss;
    EXPECT_LT(last, first) << to_string(kind);
  }
}

TEST(Trainers, RejectsMismatchedData) {
  const Dataset data = toy(7);
  auto cfg = base_config(TrainerKind::Gairat);
  Model m({Dense{3, 2}});
  auto state = OptimizerState::for_model(m, cfg.sgd, 0.05);
  EXPECT_THROW(train_epoch(m, state, data, cfg, 0), ConfigError);
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace gair
