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
#include <string_view>
#include <vector>

#include "hz/nn/weights.hpp"

namespace hz::nn {

enum class OptimizerKind { kSgd, kAdam };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // learning_rate > 0 (0 is accepted as a no-op step), weight_decay >= 0,
  // betas in [0, 1).
  void validate() const;
};

// Adam moments; empty until the first step.
struct OptimizerState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t steps = 0;
};

// In-place update on a flat parameter vector. Weight decay is added to the
// gradient (L2 form) for both optimizers:
//   sgd:  p -= lr * (g + wd * p)
//   adam: g' = g + wd * p; m,v recursion with bias correction.
void apply_step(std::span<double> params, std::span<const double> grads,
                const OptimizerConfig& cfg, OptimizerState& state);

ModelWeights step(const ModelWeights& w, const ModelWeights& grads,
                  const OptimizerConfig& cfg, OptimizerState& state);

}  // namespace hz::nn
