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

#include <span>
#include <string_view>
#include <vector>

namespace gair {

enum class WeightFamily { Constant, Tanh, Linear, Sigmoid };

std::string_view to_string(WeightFamily family);

/// Geometry-aware weight assignment: which decreasing map turns kappa into a
/// loss weight, and for how many initial epochs every weight is forced to 1.
struct WeightScheme {
  WeightFamily family = WeightFamily::Tanh;
  double lambda = 0.0;  ///< shift for Tanh / Sigmoid; ignored otherwise
  int burn_in_epochs = 0;

  friend bool operator==(const WeightScheme&, const WeightScheme&) = default;
};

/// Maps a geometry value to a weight in [0, 1]:
///   Tanh:     (1 + tanh(lambda + 5 (1 - 2 kappa / K))) / 2
///   Linear:   1 - kappa / (K + 1)
///   Sigmoid:  sigmoid(lambda + 5 (1 - 2 kappa / K))
///   Constant: 1
/// Throws DomainError unless 0 <= kappa <= K and K >= 1.
double geometry_weight(int kappa, int steps, const WeightScheme& scheme);

/// Raw and sum-to-one weights for one mini-batch.
struct BatchWeights {
  std::vector<double> raw;
  std::vector<double> normalized;
};

/// normalized[i] = raw[i] / sum(raw); uniform 1/m when every raw weight is 0.
/// Throws DomainError on an empty list or a negative entry.
BatchWeights normalize_weights(std::span<const double> raw);

/// Constant scheme during burn-in (epoch < burn_in_epochs), else `scheme`.
WeightScheme effective_scheme(int epoch, const WeightScheme& scheme);

}  // namespace gair
