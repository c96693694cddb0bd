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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gair/model.hpp"
#include "gair/optim.hpp"
#include "gair/rng.hpp"

namespace gair {

/// Everything needed to resume or evaluate a model.
///
/// Binary layout, all integers and floats little-endian:
///
///   "GAIR"                      4-byte magic
///   u32  version                (kCheckpointVersion)
///   i64  epoch
///   u64  rng_state[4]
///   u32  layer count, then per layer:
///          u8 kind (0 dense, 1 relu, 2 conv2d)
///          dense: u64 in, u64 out
///          conv2d: u64 in_channels, out_channels, height, width, kernel
///   f64  learning_rate, momentum, weight_decay
///   u32  tensor count, then per tensor:
///          u32 name length, name bytes, u32 rank, u64 extents[rank]
///   f64  payload of every tensor, in manifest order
///
/// Tensors are the model parameters ("layer<i>.weight" / "layer<i>.bias")
/// followed by their momentum buffers ("velocity.layer<i>.weight", ...).
struct Checkpoint {
  Model model;
  OptimizerState optimizer;
  std::int64_t epoch = 0;
  Rng::State rng_state{};

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
/// Throws FormatError on bad magic, unsupported version, truncation or a
/// manifest that does not match the declared layers.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gair
