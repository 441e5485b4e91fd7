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
#include <iosfwd>
#include <span>
#include <vector>

#include "hz/core/matrix.hpp"
#include "hz/data/tetris.hpp"
#include "hz/nn/architecture.hpp"
#include "hz/nn/weights.hpp"
#include "hz/zoo/zoo.hpp"

namespace hz::zoo {

struct ModelRef {
  std::size_t model_id = 0;
  const nn::ModelWeights* weights = nullptr;
  nn::Architecture arch;
  const Metrics* metrics = nullptr;
};

// Final viable checkpoint of every model (optionally of one split only).
std::vector<ModelRef> final_models(const Zoo& zoo);
std::vector<ModelRef> final_models(const Zoo& zoo, Split split);

// Pairwise rate of identical class predictions on x.
Matrix agreement_kappa(std::span<const ModelRef> models, const Matrix& x);

// Linear CKA of two activation matrices over the same n samples. Returns 0
// when either centered matrix is identically zero.
double linear_cka(const Matrix& x, const Matrix& y);

// Pairwise linear CKA of the output of layer `layer` (post-activation for
// hidden layers, logits for the last).
Matrix cka_kappa(std::span<const ModelRef> models, const Matrix& probe, std::size_t layer);

struct DistanceMatrices {
  // ||w_k - w_l||^2 / mean_n ||w_n||^2
  Matrix l2;
  // 1 - w_l^T w_k / (||w_k||^2 ||w_l||^2), evaluated as written. The
  // diagonal is defined as 0.
  Matrix cos;
};

DistanceMatrices weight_distances(const std::vector<std::vector<double>>& flat_weights);
DistanceMatrices weight_distances(std::span<const ModelRef> models);

struct DiversityReport {
  std::size_t models = 0;
  std::size_t nonviable = 0;
  double test_acc_mean = 0.0;
  double test_acc_std = 0.0;
  double agreement_mean = 1.0;
  double agreement_std = 0.0;
  double cka_mean = 1.0;
  double cka_std = 0.0;
  double l2_mean = 0.0;
  double l2_std = 0.0;
  double cos_mean = 0.0;
  double cos_std = 0.0;
};

// Statistics over final viable checkpoints; CKA uses the first
// `cka_samples` rows of data.
DiversityReport diversity_report(const Zoo& zoo, const data::ImageDataset& data,
                                 std::size_t cka_samples = 50);

void write_csv(const DiversityReport& r, std::ostream& out, std::uint64_t config_hash);

// Mean and population std of the strictly-upper triangle.
std::pair<double, double> off_diagonal_stats(const Matrix& m);

}  // namespace hz::zoo
