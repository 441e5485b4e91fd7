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

#include <optional>
#include <span>
#include <vector>

#include "hz/core/matrix.hpp"
#include "hz/nn/weights.hpp"
#include "hz/zoo/zoo.hpp"

namespace hz::analysis {

// Per layer: mean, std, q0, q25, q50, q75, q100 over weights and biases.
struct LayerStats {
  double mean = 0.0;
  double std = 0.0;
  double q0 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q100 = 0.0;
};

struct WeightStats {
  std::vector<LayerStats> layers;

  static constexpr std::size_t kPerLayer = 7;
  std::vector<double> features() const;
};

WeightStats weight_stats(const nn::ModelWeights& w);

// Linear-interpolated quantile of already sorted values, q in [0, 1].
double sorted_quantile(std::span<const double> sorted, double q);

// Normalized spectral entropy of W: eigenvalues of the smaller Gram matrix,
// p_i = lambda_i / sum(lambda), S = -sum p_i ln p_i / ln(min(rows, cols)).
// Zero matrices and single-row/column matrices give 0.
double matrix_entropy(const Matrix& w);

// Weight matrix of layer l as a Matrix (out_dim x in_dim).
Matrix layer_matrix(const nn::ModelWeights& w, std::size_t l);

// Layer with the most weight entries; ties go to the earlier layer.
std::size_t largest_layer(const nn::Architecture& arch);

// Median matrix entropy per epoch over viable checkpoints; NaN for epochs
// without viable checkpoints. Uses the largest layer unless one is given.
std::vector<double> entropy_trajectory(const zoo::Zoo& zoo,
                                       std::optional<std::size_t> layer = std::nullopt);

double median(std::vector<double> values);

}  // namespace hz::analysis
