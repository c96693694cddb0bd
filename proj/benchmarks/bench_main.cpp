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

#include <benchmark/benchmark.h>

#include "gair/attacks.hpp"
#include "gair/gradients.hpp"
#include "gair/trainers.hpp"

namespace gair {
namespace {

Model mlp(std::size_t in, std::size_t width, std::size_t classes) {
  Rng rng(1);
  return Model::initialized({Dense{in, width}, Relu{}, Dense{width, width}, Relu{}, Dense{width, classes}}, rng);
}

Tensor random_inputs(std::size_t n, std::size_t d) {
  Rng rng(2);
  Tensor x({n, d});
  for (double& v : x.data()) v = rng.uniform();
  return x;
}

void BM_Forward(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const Model m = mlp(784, width, 10);
  const Tensor x = random_inputs(128, 784);
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(x));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128);

void BM_InputGradient(benchmark::State& state) {
  const Model m = mlp(784, 64, 10);
  const Tensor x = random_inputs(128, 784);
  std::vector<std::size_t> labels(128);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 10;
  const auto sup = Supervision::from_labels(labels);
  for (auto _ : state) benchmark::DoNotOptimize(input_gradient(m, x, sup, LossKind::CrossEntropy));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_InputGradient);

void BM_GaPgd(benchmark::State& state) {
  const Model m = mlp(784, 64, 10);
  const Tensor x = random_inputs(1, 784);
  AttackConfig cfg;
  cfg.steps = static_cast<int>(state.range(0));
  cfg.clamp_box = Box{};
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(ga_pgd(m, x, 3, cfg, rng));
}
BENCHMARK(BM_GaPgd)->Arg(10)->Arg(40);

void BM_GairatEpoch(benchmark::State& state) {
  const Dataset data = gen_gaussian_blobs(4, 256, {Point2{-1, 0}, Point2{1, 0}}, 0.8);
  TrainerConfig cfg;
  cfg.attack.epsilon = 0.3;
  cfg.attack.alpha = 0.03;
  cfg.attack.steps = 10;
  cfg.batch_size = 64;
  cfg.schedule = LrSchedule(0.05);
  Model m = mlp(2, 32, 2);
  auto opt = OptimizerState::for_model(m, cfg.sgd, 0.05);
  int epoch = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gairat_epoch(m, opt, data, cfg, epoch++));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_GairatEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gair

BENCHMARK_MAIN();
