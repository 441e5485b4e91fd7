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

#include <cstddef>
#include <span>
#include <vector>

#include "hz/nn/architecture.hpp"

namespace hz::nn {

// Parameters of a feed-forward classifier stored in flatten() order: for each
// layer the (out_dim x in_dim) weight matrix row-major, then its bias vector.
// Gradients use the same type.
class ModelWeights {
 public:
  ModelWeights() = default;
  explicit ModelWeights(const Architecture& arch);

  // Throws Error(kShapeMismatch) when the length does not match the arch.
  static ModelWeights unflatten(std::span<const double> flat, const Architecture& arch);
  std::vector<double> flatten() const { return params_; }

  std::size_t num_layers() const { return shapes_.size(); }
  const LayerShape& shape(std::size_t l) const { return shapes_[l]; }
  const std::vector<LayerShape>& shapes() const { return shapes_; }
  bool matches(const Architecture& arch) const { return shapes_ == arch.layers; }

  std::span<double> weight(std::size_t l);
  std::span<const double> weight(std::size_t l) const;
  std::span<double> bias(std::size_t l);
  std::span<const double> bias(std::size_t l) const;
  // Weights and bias of layer l as one contiguous block.
  std::span<const double> layer(std::size_t l) const;
  std::span<double> layer(std::size_t l);

  double& w(std::size_t l, std::size_t r, std::size_t c) {
    return params_[offsets_[l] + r * shapes_[l].in_dim + c];
  }
  double w(std::size_t l, std::size_t r, std::size_t c) const {
    return params_[offsets_[l] + r * shapes_[l].in_dim + c];
  }
  double& b(std::size_t l, std::size_t r) {
    return params_[offsets_[l] + shapes_[l].out_dim * shapes_[l].in_dim + r];
  }
  double b(std::size_t l, std::size_t r) const {
    return params_[offsets_[l] + shapes_[l].out_dim * shapes_[l].in_dim + r];
  }

  std::span<double> flat() { return params_; }
  std::span<const double> flat() const { return params_; }
  std::size_t size() const { return params_.size(); }

  bool all_finite() const;

  friend bool operator==(const ModelWeights& a, const ModelWeights& b) {
    return a.shapes_ == b.shapes_ && a.params_ == b.params_;
  }

 private:
  std::vector<LayerShape> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

}  // namespace hz::nn
