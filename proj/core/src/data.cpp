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
#include <cmath>
#include <numbers>

#include "gair/data.hpp"
#include "gair/errors.hpp"
#include "gair/rng.hpp"

namespace gair {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.inputs = inputs.gather_rows(indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  out.class_count = class_count;
  out.domain_box = domain_box;
  return out;
}

std::optional<Box> Dataset::clamp_box() const {
  if (!domain_box) return std::nullopt;
  return Box{};
}

void Dataset::validate() const {
  if (class_count < 2) throw ConfigError("dataset needs at least two classes");
  if (inputs.rows() != labels.size()) throw ConfigError("input rows and label count differ");
  for (std::size_t y : labels) {
    if (y >= class_count) throw DomainError("label " + std::to_string(y) + " outside [0, C)");
  }
  if (domain_box) {
    for (double v : inputs.data()) {
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("boxed dataset has an input outside [0, 1]");
    }
  }
}

Dataset gen_gaussian_blobs(std::uint64_t seed, std::size_t n_per_class, const std::array<Point2, 2>& means,
                           double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("blob sigma must be positive");
  if (n_per_class == 0) throw ConfigError("need at least one example per class");
  Rng rng(seed);
  Dataset out;
  out.class_count = 2;
  out.inputs = Tensor({2 * n_per_class, 2});
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const std::size_t r = k * n_per_class + i;
      out.inputs.at(r, 0) = means[k].x + sigma * rng.normal();
      out.inputs.at(r, 1) = means[k].y + sigma * rng.normal();
      out.labels.push_back(k);
    }
  }
  return out;
}

Dataset gen_circles(std::uint64_t seed, std::size_t n_per_class, const std::array<double, 2>& radii,
                    double noise_sigma) {
  if (!(radii[0] > 0.0) || !(radii[1] > 0.0) || radii[0] == radii[1]) {
    throw ConfigError("circle radii must be distinct and positive");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("circle noise must be nonnegative");
  if (n_per_class == 0) throw ConfigError("need at least one example per class");
  Rng rng(seed);
  Dataset out;
  out.class_count = 2;
  out.inputs = Tensor({2 * n_per_class, 2});
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const std::size_t r = k * n_per_class + i;
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double radius = radii[k] + noise_sigma * rng.normal();
      out.inputs.at(r, 0) = radius * std::cos(angle);
      out.inputs.at(r, 1) = radius * std::sin(angle);
      out.labels.push_back(k);
    }
  }
  return out;
}

BatchPlan BatchPlan::make(std::size_t n, std::size_t batch_size, std::uint64_t seed, int epoch) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (epoch < 0) throw DomainError("epoch must be nonnegative");
  BatchPlan plan;
  plan.seed = seed;
  plan.epoch = epoch;
  plan.batch_size = batch_size;
  plan.permutation.resize(n);
  for (std::size_t i = 0; i < n; ++i) plan.permutation[i] = i;
  Rng rng = Rng::derive(seed, {0x5348'5546ULL, static_cast<std::uint64_t>(epoch)});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(plan.permutation[i - 1], plan.permutation[j]);
  }
  return plan;
}

std::size_t BatchPlan::batch_count() const noexcept {
  return (permutation.size() + batch_size - 1) / batch_size;
}

std::span<const std::size_t> BatchPlan::batch(std::size_t b) const {
  const std::size_t begin = b * batch_size;
  const std::size_t end = std::min(permutation.size(), begin + batch_size);
  return std::span<const std::size_t>(permutation).subspan(begin, end - begin);
}

std::vector<std::vector<std::size_t>> batches(const Dataset& data, std::size_t batch_size, std::uint64_t seed,
                                              int epoch) {
  const BatchPlan plan = BatchPlan::make(data.size(), batch_size, seed, epoch);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(plan.batch_count());
  for (std::size_t b = 0; b < plan.batch_count(); ++b) {
    auto span = plan.batch(b);
    out.emplace_back(span.begin(), span.end());
  }
  return out;
}

}  // namespace gair
