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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hz/core/matrix.hpp"
#include "hz/nn/weights.hpp"
#include "hz/zoo/zoo.hpp"

namespace hz::analysis {

struct LinearProbe {
  std::vector<double> coefficients;
  double intercept = 0.0;
  double ridge = 0.0;

  std::vector<double> predict(const Matrix& x) const;
};

// Least squares with an unpenalized intercept: minimizes
// ||y - X r - c||^2 + ridge ||r||^2. With ridge 0 the minimum-norm solution
// is taken (pseudoinverse), so rank-deficient features are fine.
// Throws Error(kInvalidArgument) for fewer than 2 rows.
LinearProbe fit_probe(const Matrix& x, std::span<const double> y, double ridge = 1e-6);

struct R2 {
  double value = 0.0;
  // SST == 0; value is then defined as 0.
  bool degenerate = false;
};

// 1 - SSE/SST.
R2 r2_score(std::span<const double> truth, std::span<const double> pred);

// Kendall's tau-b in O(n log n). Returns 0 if either side is constant.
double kendall_tau(std::span<const double> pred, std::span<const double> truth);

struct ProbeResult {
  LinearProbe probe;
  R2 train_r2;
  R2 test_r2;
  double test_tau = 0.0;
};

ProbeResult evaluate_probe(const Matrix& x_train, std::span<const double> y_train,
                           const Matrix& x_test, std::span<const double> y_test,
                           double ridge = 1e-6);

struct CategoricalOptions {
  std::size_t epochs = 500;
  double lr = 0.5;
  double l2 = 1e-4;
};

struct CategoricalResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// Softmax linear classifier on standardized features trained by full-batch
// gradient descent from zero weights.
CategoricalResult fit_categorical_probe(const Matrix& x_train, std::span<const int> y_train,
                                        const Matrix& x_test, std::span<const int> y_test,
                                        std::size_t num_classes,
                                        const CategoricalOptions& options = {});

// One probe sample: a viable checkpoint of some trajectory.
struct ProbeSample {
  std::size_t model_index = 0;  // into zoo.models
  std::size_t epoch = 0;
  zoo::Split split = zoo::Split::kTrain;
  double acc = 0.0;
  double eph = 0.0;
  double ggap = 0.0;
  int activation = 0;
  int init = 0;
};

// Viable checkpoints whose epoch is a multiple of `epoch_stride`.
std::vector<ProbeSample> probe_samples(const zoo::Zoo& zoo, std::size_t epoch_stride = 5);

using FeatureFn = std::function<std::vector<double>(const nn::ModelWeights&)>;

// Feature matrix, one row per sample.
Matrix feature_matrix(const zoo::Zoo& zoo, std::span<const ProbeSample> samples,
                      const FeatureFn& features);

FeatureFn raw_weight_features();
FeatureFn stat_features();

struct ProbeRow {
  std::string feature;
  std::string target;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double train_r2 = 0.0;
  double test_r2 = 0.0;
  double test_tau = 0.0;
  bool degenerate = false;
  // Categorical targets report accuracy instead of R^2.
  std::optional<double> test_accuracy;
};

struct ProbeSuiteOptions {
  std::size_t epoch_stride = 5;
  double ridge = 1e-6;
  bool categorical = false;
  CategoricalOptions categorical_options;
};

// Fits on the zoo's train split, reports on its test split. Rows for acc,
// eph and ggap, then activation and init when requested.
std::vector<ProbeRow> probe_suite(const zoo::Zoo& zoo, const std::string& feature_name,
                                  const Matrix& features, std::span<const ProbeSample> samples,
                                  const ProbeSuiteOptions& options = {});

std::vector<ProbeRow> probe_suite(const zoo::Zoo& zoo, const std::string& feature_name,
                                  const FeatureFn& features,
                                  const ProbeSuiteOptions& options = {});

void write_probe_csv(std::span<const ProbeRow> rows, std::ostream& out, std::uint64_t config_hash);

}  // namespace hz::analysis
