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

#include <span>
#include <vector>

#include "hz/core/matrix.hpp"
#include "hz/nn/architecture.hpp"
#include "hz/nn/weights.hpp"

namespace hz::nn {

double activate(Activation a, double x);
double activate_derivative(Activation a, double x);

// Per-layer pre-activations and activations of one forward pass.
// post[0] is the input batch; post[l+1] is the output of layer l.
struct ForwardCache {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
};

// Logits (batch x output_dim). Throws Error(kShapeMismatch) if the feature
// dimension or weight shapes disagree with arch.
Matrix forward(const ModelWeights& w, const Architecture& arch, const Matrix& x,
               ForwardCache* cache = nullptr);

// Post-activation output of hidden layer `layer` (0-based).
Matrix hidden_activations(const ModelWeights& w, const Architecture& arch,
                          const Matrix& x, std::size_t layer);

std::vector<int> predict(const ModelWeights& w, const Architecture& arch, const Matrix& x);

struct LossAndGradient {
  double loss = 0.0;
  ModelWeights gradient;
};

// Mean softmax cross-entropy over the batch and its gradient.
LossAndGradient backward(const ModelWeights& w, const Architecture& arch, const Matrix& x,
                         std::span<const int> labels);

double cross_entropy(const ModelWeights& w, const Architecture& arch, const Matrix& x,
                     std::span<const int> labels);

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
};

// Throws Error(kInvalidArgument) on an empty split.
EvalResult evaluate(const ModelWeights& w, const Architecture& arch, const Matrix& x,
                    std::span<const int> labels);

}  // namespace hz::nn
