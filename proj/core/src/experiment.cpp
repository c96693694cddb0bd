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
#include "gair/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "gair/errors.hpp"
#include "gair/trainers.hpp"

namespace gair {
namespace {

constexpr std::uint64_t kTrainData = 1;
constexpr std::uint64_t kTestData = 2;
constexpr std::uint64_t kInit = 3;
constexpr std::uint64_t kEval = 4;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string checkpoint_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04d.gair", epoch);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset synthetic(const DatasetSpec& spec, std::uint64_t seed, std::size_t n_per_class) {
  if (spec.kind == DatasetKind::Blobs) return gen_gaussian_blobs(seed, n_per_class, spec.means, spec.sigma);
  return gen_circles(seed, n_per_class, spec.radii, spec.noise);
}

}  // namespace

DataSplits load_datasets(const DatasetSpec& spec, std::uint64_t seed) {
  DataSplits out;
  if (spec.kind == DatasetKind::Idx) {
    out.train = load_idx(spec.train_images, spec.train_labels, spec.classes);
    out.test = load_idx(spec.test_images, spec.test_labels, spec.classes);
    if (out.train.features() != out.test.features()) throw ConfigError("train and test images differ in size");
    const std::size_t classes = std::max(out.train.class_count, out.test.class_count);
    out.train.class_count = classes;
    out.test.class_count = classes;
  } else {
    out.train = synthetic(spec, Rng::derive(seed, {kTrainData}).next_u64(), spec.n_per_class);
    out.test = synthetic(spec, Rng::derive(seed, {kTestData}).next_u64(), spec.test_n_per_class);
  }
  out.train.validate();
  out.test.validate();
  return out;
}

Model build_model(const ExperimentConfig& config, const Dataset& train) {
  Rng rng = Rng::derive(config.seed, {kInit});
  Model model = Model::initialized(build_layers(config.model, train.features()), rng);
  if (model.class_count() != train.class_count) {
    throw ConfigError("model emits " + std::to_string(model.class_count()) + " scores but the dataset has " +
                      std::to_string(train.class_count) + " classes");
  }
  return model;
}

std::string metrics_header(const std::vector<NamedAttack>& attacks) {
  std::string header = "epoch,lr,train_nat_err,train_rob_err,test_nat_err";
  for (const auto& a : attacks) header += ",test_rob_err_" + a.name;
  header += ",kappa_mean,kappa_median,flatness,wall_time_s\n";
  return header;
}

RunArtifacts run_experiment(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  fs::remove(dir / "FAILED");

  RunArtifacts artifacts;
  try {
    if (config.eval_attacks.empty()) throw ConfigError("need at least one eval attack");
    write_text(dir / "config.txt", serialize_config(config));

    const DataSplits data = load_datasets(config.dataset, config.seed);
    Model model = build_model(config, data.train);
    TrainerConfig trainer = config.trainer;
    trainer.seed = config.seed;
    trainer.validate();
    OptimizerState state = OptimizerState::for_model(model, trainer.sgd, trainer.schedule.at(0));

    artifacts.metrics_csv = dir / "metrics.csv";
    std::ofstream metrics(artifacts.metrics_csv, std::ios::binary | std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot open " + artifacts.metrics_csv.string());
    metrics << metrics_header(config.eval_attacks);
    metrics.flush();

    const NamedAttack& selection = config.eval_attacks.front();
    for (int epoch = 0; epoch < trainer.epochs; ++epoch) {
      const EpochStats stats = train_epoch(model, state, data.train, trainer, epoch);
      const bool last = epoch + 1 == trainer.epochs;
      if (!last && (epoch + 1) % config.eval_every != 0) continue;

      const std::uint64_t eval_seed = Rng::derive(config.seed, {kEval, static_cast<std::uint64_t>(epoch)}).next_u64();
      const GeometryProfile kappa = make_profile(stats.kappa, trainer.attack.steps);
      std::string row = std::to_string(epoch) + "," + num(state.learning_rate);
      row += "," + num(standard_error(model, data.train));
      row += "," + num(robust_error(model, data.train, selection.config, eval_seed));
      row += "," + num(standard_error(model, data.test));
      double selection_error = 0.0;
      for (const auto& a : config.eval_attacks) {
        const double err = robust_error(model, data.test, a.config, eval_seed);
        if (&a == &selection) selection_error = err;
        row += "," + num(err);
      }
      row += "," + num(kappa.mean) + "," + std::to_string(kappa.median);
      row += "," + num(boundary_flatness(model, data.test, trainer.attack, config.flatness, eval_seed));
      row += "," + num(config.record_wall_time ? stats.wall_time_s : 0.0) + "\n";
      metrics << row;
      metrics.flush();
      if (!metrics) throw std::runtime_error("failed writing " + artifacts.metrics_csv.string());

      const std::string name = checkpoint_name(epoch);
      Checkpoint ckpt{model, state, epoch, Rng::derive(config.seed, {kEval, static_cast<std::uint64_t>(epoch)}).state()};
      save_checkpoint(ckpt, dir / name);
      artifacts.checkpoints.push_back(dir / name);
      artifacts.history.entries.push_back({name, selection_error, epoch});
    }

    artifacts.choice = select_checkpoint(artifacts.history);
    auto error_at = [&](int epoch) {
      for (const auto& e : artifacts.history.entries) {
        if (e.epoch == epoch) return e.robust_error;
      }
      return 0.0;
    };
    std::string summary;
    summary += "selection_attack = " + selection.name + "\n";
    summary += "best_epoch = " + std::to_string(artifacts.choice.best_epoch) + "\n";
    summary += "best_checkpoint = " + checkpoint_name(artifacts.choice.best_epoch) + "\n";
    summary += "best_test_rob_err = " + num(error_at(artifacts.choice.best_epoch)) + "\n";
    summary += "last_epoch = " + std::to_string(artifacts.choice.last_epoch) + "\n";
    summary += "last_checkpoint = " + checkpoint_name(artifacts.choice.last_epoch) + "\n";
    summary += "last_test_rob_err = " + num(error_at(artifacts.choice.last_epoch)) + "\n";
    artifacts.summary = dir / "summary.txt";
    write_text(artifacts.summary, summary);
  } catch (const std::exception& err) {
    std::ofstream marker(dir / "FAILED", std::ios::trunc);
    marker << err.what() << "\n";
    throw;
  }
  return artifacts;
}

}  // namespace gair
