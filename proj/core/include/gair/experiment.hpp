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

#include <filesystem>
#include <string>
#include <vector>

#include "gair/checkpoint.hpp"
#include "gair/config.hpp"
#include "gair/data.hpp"
#include "gair/eval.hpp"

namespace gair {

struct DataSplits {
  Dataset train;
  Dataset test;
};

/// Generates or loads the train / test splits named by the config. Synthetic
/// test sets use a stream derived from the run seed, distinct from training.
DataSplits load_datasets(const DatasetSpec& spec, std::uint64_t seed);

/// He-initialized model for the config, seeded from the run seed.
Model build_model(const ExperimentConfig& config, const Dataset& train);

/// Header of metrics.csv for the given eval attacks.
std::string metrics_header(const std::vector<NamedAttack>& attacks);

struct RunArtifacts {
  std::filesystem::path metrics_csv;
  std::filesystem::path summary;
  std::vector<std::filesystem::path> checkpoints;
  CheckpointHistory history;
  CheckpointChoice choice;
};

/// Trains for cfg.trainer.epochs epochs, evaluating every eval_every epochs
/// and always at the final epoch. Writes into cfg.output_dir:
///   config.txt        normalized config
///   metrics.csv       one row per evaluated epoch
///   epoch_<e>.gair    checkpoint per evaluated epoch
///   summary.txt       best / last checkpoint
/// On failure a FAILED marker holding the error message is written, partial
/// artifacts are left in place and the exception is rethrown.
RunArtifacts run_experiment(const ExperimentConfig& config);

}  // namespace gair
