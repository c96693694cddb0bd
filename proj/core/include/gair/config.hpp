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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gair/data.hpp"
#include "gair/eval.hpp"
#include "gair/model.hpp"
#include "gair/trainers.hpp"

namespace gair {

enum class DatasetKind { Blobs, Circles, Idx };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Blobs;
  std::size_t n_per_class = 200;
  std::size_t test_n_per_class = 200;
  std::array<Point2, 2> means{Point2{-1.0, 0.0}, Point2{1.0, 0.0}};
  double sigma = 0.5;
  std::array<double, 2> radii{1.0, 2.0};
  double noise = 0.05;
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::size_t classes = 0;  ///< IDX only; 0 infers from the labels

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Layer list as written in the config, e.g. {"dense:32", "relu", "dense:2"}.
/// Dense and conv input extents are inferred when the model is built.
struct ModelSpec {
  std::vector<std::string> layers;
  std::optional<std::array<std::size_t, 3>> image;  ///< C, H, W for conv front ends

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  ModelSpec model;
  TrainerConfig trainer;
  std::vector<NamedAttack> eval_attacks;  ///< first entry drives checkpoint selection
  int eval_every = 1;
  FlatnessMode flatness = FlatnessMode::Friendly;
  std::string output_dir = "run";
  std::uint64_t seed = 0;
  bool record_wall_time = false;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the sectioned key = value format:
///
///   # comment
///   [section]
///   key = value
///
/// Sections: run, dataset, model, trainer, attack, scheme, optimizer and any
/// number of eval.<name>. Unknown sections or keys, bad enum values and
/// missing required keys raise ParseError naming the line.
ExperimentConfig parse_config(std::string_view text);

/// Emits every setting explicitly; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Concrete layer stack for a dataset with `features` inputs.
std::vector<LayerSpec> build_layers(const ModelSpec& spec, std::size_t features);

}  // namespace gair
