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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hz/core/matrix.hpp"
#include "hz/nn/architecture.hpp"
#include "hz/nn/weights.hpp"
#include "json.hpp"

namespace hz::hyperrep {

// Per-layer scalar mean and std over a population's layer parameters
// (weights and biases together).
struct LayerNormStats {
  static constexpr double kStdFloor = 1e-8;
  std::vector<double> mean;
  std::vector<double> std;

  nlohmann::json to_json() const;
  static LayerNormStats from_json(const nlohmann::json& j);
};

// Two-pass mean/std per layer; std is floored at kStdFloor.
LayerNormStats fit_standardizer(std::span<const nn::ModelWeights> population);
nn::ModelWeights standardize(const nn::ModelWeights& w, const LayerNormStats& stats);
nn::ModelWeights destandardize(const nn::ModelWeights& w, const LayerNormStats& stats);

// position = {global index n, layer l, index within layer k}
using Position = std::array<std::size_t, 3>;

struct TokenSequence {
  Matrix tokens;  // N x d_t
  std::vector<Position> positions;
  Matrix mask;  // N x d_t, 1 on parameter slots and 0 on padding

  std::size_t length() const { return tokens.rows(); }
  std::size_t token_dim() const { return tokens.cols(); }
};

// Number of tokens for row slices of length in_dim + 1 split into pieces of d_t.
std::size_t tokens_per_row(const nn::LayerShape& shape, std::size_t d_t);
std::size_t tokens_in_layer(const nn::LayerShape& shape, std::size_t d_t);
std::size_t sequence_length(const nn::Architecture& arch, std::size_t d_t);
std::vector<Position> sequence_positions(const nn::Architecture& arch, std::size_t d_t);

// Each output row of a layer becomes the slice [weights..., bias], split into
// ceil(slice / d_t) tokens with zero padding at the end of the last one.
TokenSequence tokenize(const nn::ModelWeights& w, std::size_t d_t);
// Padding slots are ignored.
nn::ModelWeights detokenize(const Matrix& tokens, const nn::Architecture& arch);
nn::ModelWeights detokenize(const TokenSequence& ts, const nn::Architecture& arch);

struct Window {
  std::size_t start = 0;
  std::size_t length = 0;
};

// k windows of length min(ws, N) with uniform random starts.
std::vector<Window> draw_windows(std::size_t sequence_length, std::size_t ws, std::size_t k,
                                 std::uint64_t seed);

Matrix slice_rows(const Matrix& m, std::size_t start, std::size_t count);

}  // namespace hz::hyperrep
