// Copyright 2026 The hyperzoo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hz/core/matrix.hpp"
#include "hz/nn/architecture.hpp"
#include "hz/nn/weights.hpp"

namespace hz::analysis {

enum class SimKind { kCos, kL2 };

// exp(-||a - b||^2)
double sim_l2(const nn::ModelWeights& a, const nn::ModelWeights& b);
// a.b / (||a|| ||b||); 0 when either vector is zero.
double sim_cos(const nn::ModelWeights& a, const nn::ModelWeights& b);
double sim_pair(const nn::ModelWeights& a, const nn::ModelWeights& b, SimKind kind);

// Throws Error(kDegenerate) when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationOptions {
  std::size_t permutations_per_model = 0;
  double noise = 0.0;
  SimKind kind = SimKind::kL2;
  std::size_t cka_layer = 0;
  std::uint64_t seed = 0;
  // Rescale all weights by one common factor so that the mean squared norm
  // of the input models is 1 before computing l2 similarity.
  bool normalize_scale = true;
};

struct CorrelationResult {
  double rho = 0.0;
  std::size_t pairs = 0;
};

// Each model is represented by itself, or by `permutations_per_model` randomly
// permuted copies when that is nonzero; optional weight noise is added to
// every variant. Returns the Pearson correlation, over all pairs of variants
// of different models, between CKA of hidden activations on `probe` and
// weight similarity. The l2 similarity is evaluated relative to the closest
// pair, which leaves the correlation unchanged and avoids underflow.
CorrelationResult weight_behavior_correlation(std::span<const nn::ModelWeights> models,
                                              const nn::Architecture& arch, const Matrix& probe,
                                              const CorrelationOptions& options);

// Elementwise mean of flattened weights, optionally after aligning every
// model to `reference`.
nn::ModelWeights soup_average(std::span<const nn::ModelWeights> models, bool align_first,
                              const nn::ModelWeights* reference = nullptr);

}  // namespace hz::analysis
