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

#include "hz/nn/optimizer.hpp"

#include <cmath>
#include <string>

#include "hz/core/error.hpp"

namespace hz::nn {

std::string_view to_string(OptimizerKind k) {
  return k == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw Error(ErrorKind::kParse, "unknown optimizer: " + std::string(name));
}

void OptimizerConfig::validate() const {
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorKind::kInvalidArgument,
          "optimizer: learning rate must be >= 0");
  require(weight_decay >= 0.0, ErrorKind::kInvalidArgument,
          "optimizer: weight decay must be >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
          ErrorKind::kInvalidArgument, "optimizer: betas must lie in [0, 1)");
  require(epsilon > 0.0, ErrorKind::kInvalidArgument, "optimizer: epsilon must be > 0");
}

void apply_step(std::span<double> params, std::span<const double> grads,
                const OptimizerConfig& cfg, OptimizerState& state) {
  require(params.size() == grads.size(), ErrorKind::kShapeMismatch,
          "optimizer: parameter/gradient length mismatch");
  const double lr = cfg.learning_rate;
  const double wd = cfg.weight_decay;
  if (cfg.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * (grads[i] + wd * params[i]);
    ++state.steps;
    return;
  }
  if (state.first_moment.size() != params.size()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
    state.steps = 0;
  }
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + wd * params[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    params[i] -= lr * (m / c1) / (std::sqrt(v / c2) + cfg.epsilon);
  }
}

ModelWeights step(const ModelWeights& w, const ModelWeights& grads,
                  const OptimizerConfig& cfg, OptimizerState& state) {
  require(w.shapes() == grads.shapes(), ErrorKind::kShapeMismatch,
          "step: gradient shape mismatch");
  ModelWeights out = w;
  apply_step(out.flat(), grads.flat(), cfg, state);
  return out;
}

}  // namespace hz::nn
