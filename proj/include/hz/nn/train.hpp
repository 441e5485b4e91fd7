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
#include "hz/core/rng.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/nn/optimizer.hpp"

namespace hz::nn {

// Mini-batch order for one epoch: a permutation of [0, n) split into batches.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    Rng& rng);

// Gathers the given rows of x and labels.
Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows);
std::vector<int> gather_labels(std::span<const int> labels, std::span<const std::size_t> rows);

// One optimizer step per batch, in the given order. Returns the mean batch loss.
double train_batches(ModelWeights& w, const Architecture& arch, const Matrix& x,
                     std::span<const int> labels,
                     const std::vector<std::vector<std::size_t>>& batches,
                     const OptimizerConfig& cfg, OptimizerState& state);

}  // namespace hz::nn
