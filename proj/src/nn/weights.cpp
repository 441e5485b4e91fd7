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

#include "hz/nn/weights.hpp"

#include <cmath>
#include <string>

#include "hz/core/error.hpp"

namespace hz::nn {

ModelWeights::ModelWeights(const Architecture& arch) : shapes_(arch.layers) {
  std::size_t offset = 0;
  for (const auto& s : shapes_) {
    offsets_.push_back(offset);
    offset += s.out_dim * (s.in_dim + 1);
  }
  params_.assign(offset, 0.0);
}

ModelWeights ModelWeights::unflatten(std::span<const double> flat,
                                     const Architecture& arch) {
  ModelWeights w(arch);
  require(flat.size() == w.params_.size(), ErrorKind::kShapeMismatch,
          "unflatten: got " + std::to_string(flat.size()) + " values, arch " +
              arch.describe() + " needs " + std::to_string(w.params_.size()));
  w.params_.assign(flat.begin(), flat.end());
  return w;
}

std::span<double> ModelWeights::weight(std::size_t l) {
  return {params_.data() + offsets_[l], shapes_[l].out_dim * shapes_[l].in_dim};
}
std::span<const double> ModelWeights::weight(std::size_t l) const {
  return {params_.data() + offsets_[l], shapes_[l].out_dim * shapes_[l].in_dim};
}
std::span<double> ModelWeights::bias(std::size_t l) {
  return {params_.data() + offsets_[l] + shapes_[l].out_dim * shapes_[l].in_dim,
          shapes_[l].out_dim};
}
std::span<const double> ModelWeights::bias(std::size_t l) const {
  return {params_.data() + offsets_[l] + shapes_[l].out_dim * shapes_[l].in_dim,
          shapes_[l].out_dim};
}
std::span<const double> ModelWeights::layer(std::size_t l) const {
  return {params_.data() + offsets_[l], shapes_[l].out_dim * (shapes_[l].in_dim + 1)};
}
std::span<double> ModelWeights::layer(std::size_t l) {
  return {params_.data() + offsets_[l], shapes_[l].out_dim * (shapes_[l].in_dim + 1)};
}

bool ModelWeights::all_finite() const {
  for (double v : params_)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace hz::nn
