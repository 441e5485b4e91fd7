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

#include "hz/nn/train.hpp"

#include <algorithm>
#include <numeric>

namespace hz::nn {

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), out.row(i).begin());
  }
  return out;
}

std::vector<int> gather_labels(std::span<const int> labels, std::span<const std::size_t> rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = labels[rows[i]];
  return out;
}

double train_batches(ModelWeights& w, const Architecture& arch, const Matrix& x,
                     std::span<const int> labels,
                     const std::vector<std::vector<std::size_t>>& batches,
                     const OptimizerConfig& cfg, OptimizerState& state) {
  double total = 0.0;
  for (const auto& batch : batches) {
    const Matrix bx = gather_rows(x, batch);
    const std::vector<int> by = gather_labels(labels, batch);
    const LossAndGradient lg = backward(w, arch, bx, by);
    total += lg.loss;
    apply_step(w.flat(), lg.gradient.flat(), cfg, state);
  }
  return batches.empty() ? 0.0 : total / static_cast<double>(batches.size());
}

}  // namespace hz::nn
