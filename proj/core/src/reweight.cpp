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
#include "gair/reweight.hpp"

#include <cmath>
#include <string>

#include "gair/errors.hpp"

namespace gair {

std::string_view to_string(WeightFamily family) {
  switch (family) {
    case WeightFamily::Constant:
      return "constant";
    case WeightFamily::Tanh:
      return "tanh";
    case WeightFamily::Linear:
      return "linear";
    case WeightFamily::Sigmoid:
      return "sigmoid";
  }
  return "unknown";
}

double geometry_weight(int kappa, int steps, const WeightScheme& scheme) {
  if (steps < 1) throw DomainError("K must be at least 1");
  if (kappa < 0 || kappa > steps) {
    throw DomainError("kappa " + std::to_string(kappa) + " outside [0, " + std::to_string(steps) + "]");
  }
  const double ratio = static_cast<double>(kappa) / static_cast<double>(steps);
  const double z = scheme.lambda + 5.0 * (1.0 - 2.0 * ratio);
  switch (scheme.family) {
    case WeightFamily::Constant:
      return 1.0;
    case WeightFamily::Tanh:
      return (1.0 + std::tanh(z)) / 2.0;
    case WeightFamily::Linear:
      return 1.0 - static_cast<double>(kappa) / static_cast<double>(steps + 1);
    case WeightFamily::Sigmoid:
      return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }
  throw DomainError("unknown weight family");
}

BatchWeights normalize_weights(std::span<const double> raw) {
  if (raw.empty()) throw DomainError("cannot normalize an empty weight list");
  double total = 0.0;
  for (double w : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and nonnegative");
    total += w;
  }
  BatchWeights out;
  out.raw.assign(raw.begin(), raw.end());
  out.normalized.resize(raw.size());
  const double m = static_cast<double>(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.normalized[i] = total > 0.0 ? raw[i] / total : 1.0 / m;
  return out;
}

WeightScheme effective_scheme(int epoch, const WeightScheme& scheme) {
  if (epoch < 0) throw DomainError("epoch must be nonnegative");
  if (scheme.burn_in_epochs < 0) throw DomainError("burn-in epochs must be nonnegative");
  if (epoch < scheme.burn_in_epochs) return WeightScheme{WeightFamily::Constant, scheme.lambda, scheme.burn_in_epochs};
  return scheme;
}

}  // namespace gair
