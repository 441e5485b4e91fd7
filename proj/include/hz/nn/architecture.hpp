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
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace hz::nn {

enum class Activation { kTanh, kRelu, kSigmoid, kGelu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct LayerShape {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

// Feed-forward classifier; the activation follows every layer but the last.
struct Architecture {
  std::vector<LayerShape> layers;
  Activation activation = Activation::kTanh;

  // Builds a chained MLP from widths {in, h1, ..., out}.
  static Architecture from_widths(std::initializer_list<std::size_t> widths,
                                  Activation act = Activation::kTanh);
  static Architecture from_widths(const std::vector<std::size_t>& widths,
                                  Activation act = Activation::kTanh);

  // Throws Error(kInvalidArgument) when layers do not chain, fewer than two
  // layers are given, or any dimension is zero.
  void validate() const;

  std::size_t num_layers() const { return layers.size(); }
  std::size_t input_dim() const { return layers.front().in_dim; }
  std::size_t output_dim() const { return layers.back().out_dim; }
  std::vector<std::size_t> widths() const;
  std::vector<std::size_t> hidden_widths() const;
  // Weights plus biases.
  std::size_t parameter_count() const;
  std::size_t weight_count() const;
  std::string describe() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// 16 -> 5 -> 4 classifier used for the Tetris zoos.
Architecture tetris_architecture(Activation act = Activation::kTanh);

}  // namespace hz::nn
