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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gair/checkpoint.hpp"
#include "gair/config.hpp"
#include "gair/errors.hpp"
#include "gair/experiment.hpp"
#include "gair/loss.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string checkpoint;
  std::string split = "test";
  std::optional<std::uint64_t> seed;
};

gair::ExperimentConfig read_config(const Options& opt) {
  std::ifstream in(opt.config, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config " + opt.config);
  std::stringstream text;
  text << in.rdbuf();
  gair::ExperimentConfig cfg = gair::parse_config(text.str());
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.trainer.seed = *opt.seed;
  }
  return cfg;
}

gair::Dataset pick_split(const gair::ExperimentConfig& cfg, const std::string& split) {
  gair::DataSplits data = gair::load_datasets(cfg.dataset, cfg.seed);
  return split == "train" ? std::move(data.train) : std::move(data.test);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes to --out when given, stdout otherwise.
void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.out, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + opt.out);
  out << text;
}

int cmd_train(const Options& opt) {
  gair::ExperimentConfig cfg = read_config(opt);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  const gair::RunArtifacts art = gair::run_experiment(cfg);
  std::cout << "metrics: " << art.metrics_csv.string() << "\n"
            << "best epoch: " << art.choice.best_epoch << "\n"
            << "last epoch: " << art.choice.last_epoch << "\n";
  return 0;
}

int cmd_attack(const Options& opt) {
  const gair::ExperimentConfig cfg = read_config(opt);
  const gair::Checkpoint ckpt = gair::load_checkpoint(opt.checkpoint);
  const gair::Dataset data = pick_split(cfg, opt.split);
  const auto report = gair::robustness_report(ckpt.model, data, cfg.eval_attacks, cfg.seed);
  std::string text = "attack,error\n";
  text += "natural," + num(report.standard_error) + "\n";
  for (const auto& [name, err] : report.robust_error) text += name + "," + num(err) + "\n";
  emit(opt, text);
  return 0;
}

int cmd_profile(const Options& opt) {
  const gair::ExperimentConfig cfg = read_config(opt);
  const gair::Checkpoint ckpt = gair::load_checkpoint(opt.checkpoint);
  const gair::Dataset data = pick_split(cfg, opt.split);
  const auto profile = gair::geometry_profile(ckpt.model, data, cfg.trainer.attack, cfg.seed);
  std::string text = "index,label,kappa\n";
  for (std::size_t i = 0; i < profile.kappa.size(); ++i) {
    text += std::to_string(i) + "," + std::to_string(data.labels[i]) + "," + std::to_string(profile.kappa[i]) + "\n";
  }
  emit(opt, text);
  std::cerr << "kappa mean " << num(profile.mean) << ", median " << profile.median << "\n";
  return 0;
}

int cmd_logits(const Options& opt) {
  const gair::ExperimentConfig cfg = read_config(opt);
  const gair::Checkpoint ckpt = gair::load_checkpoint(opt.checkpoint);
  const gair::Dataset data = pick_split(cfg, opt.split);
  const gair::Tensor logits = ckpt.model.forward(data.inputs);
  std::string text = "index,label";
  for (std::size_t k = 0; k < logits.cols(); ++k) text += ",logit_" + std::to_string(k);
  text += "\n";
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    text += std::to_string(i) + "," + std::to_string(data.labels[i]);
    for (double v : logits.row(i)) text += "," + num(v);
    text += "\n";
  }
  emit(opt, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry-aware adversarial training experiments"};
  app.require_subcommand(1);

  Options opt;
  auto common = [&](CLI::App* sub, bool needs_checkpoint) {
    sub->add_option("--config", opt.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the config seed");
    if (needs_checkpoint) {
      sub->add_option("--checkpoint", opt.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
      sub->add_option("--split", opt.split, "dataset split")->check(CLI::IsMember({"train", "test"}));
    }
  };

  auto* train = app.add_subcommand("train", "run a full experiment");
  common(train, false);
  train->add_option("--out", opt.out, "output directory (overrides the config)");

  auto* attack = app.add_subcommand("attack", "robust error of a checkpoint under the eval attacks");
  common(attack, true);
  attack->add_option("--out", opt.out, "CSV output file");

  auto* profile = app.add_subcommand("profile", "per-example kappa under the training attack");
  common(profile, true);
  profile->add_option("--out", opt.out, "CSV output file");

  auto* logits = app.add_subcommand("logits", "raw logits of every example");
  common(logits, true);
  logits->add_option("--out", opt.out, "CSV output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(opt);
    if (attack->parsed()) return cmd_attack(opt);
    if (profile->parsed()) return cmd_profile(opt);
    return cmd_logits(opt);
  } catch (const gair::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
