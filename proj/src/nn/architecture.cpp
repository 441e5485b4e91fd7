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

#include "hz/nn/architecture.hpp"

#include <string>

#include "hz/core/error.hpp"

namespace hz::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kGelu: return "gelu";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "gelu") return Activation::kGelu;
  throw Error(ErrorKind::kParse, "unknown activation: " + std::string(name));
}

Architecture Architecture::from_widths(std::initializer_list<std::size_t> widths,
                                       Activation act) {
  return from_widths(std::vector<std::size_t>(widths), act);
}

Architecture Architecture::from_widths(const std::vector<std::size_t>& widths,
                                       Activation act) {
  Architecture arch;
  arch.activation = act;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    arch.layers.push_back({widths[i], widths[i + 1]});
  }
  arch.validate();
  return arch;
}

void Architecture::validate() const {
  require(layers.size() >= 2, ErrorKind::kInvalidArgument,
          "architecture needs at least 2 layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    require(layers[l].in_dim >= 1 && layers[l].out_dim >= 1,
            ErrorKind::kInvalidArgument, "architecture: zero-width layer");
    if (l + 1 < layers.size()) {
      require(layers[l].out_dim == layers[l + 1].in_dim, ErrorKind::kInvalidArgument,
              "architecture: layer " + std::to_string(l) + " does not chain");
    }
  }
}

std::vector<std::size_t> Architecture::widths() const {
  std::vector<std::size_t> w{layers.front().in_dim};
  for (const auto& layer : layers) w.push_back(layer.out_dim);
  return w;
}

std::vector<std::size_t> Architecture::hidden_widths() const {
  std::vector<std::size_t> w;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) w.push_back(layers[l].out_dim);
  return w;
}

std::size_t Architecture::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.out_dim * (layer.in_dim + 1);
  return n;
}

std::size_t Architecture::weight_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.out_dim * layer.in_dim;
  return n;
}

std::string Architecture::describe() const {
  std::string s;
  for (std::size_t w : widths()) {
    if (!s.empty()) s += "-";
    s += std::to_string(w);
  }
  return s + ":" + std::string(to_string(activation));
}

Architecture tetris_architecture(Activation act) {
  return Architecture::from_widths({16, 5, 4}, act);
}

}  // namespace hz::nn
