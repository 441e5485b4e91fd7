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
#include <functional>
#include <optional>
#include <vector>

#include "hz/autodiff/parameters.hpp"
#include "hz/core/matrix.hpp"

namespace hz::ad {

struct Var {
  std::size_t id = 0;
};

// Reverse-mode differentiation over row-major matrices. Ops record their
// output and a backward closure; backward() runs the closures in reverse and
// adds parameter gradients into the ParameterStore.
class Tape {
 public:
  explicit Tape(ParameterStore* params = nullptr) : params_(params), read_(params) {}
  // Inference only: backward() through parameters throws.
  explicit Tape(const ParameterStore* params) : params_(nullptr), read_(params) {}

  Var constant(Matrix value);
  Var param(std::size_t index);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(out)/d(out) = 1 for a 1x1 output.
  void backward(Var out);

  Var matmul(Var a, Var b);
  // x W^T + b with W (out x in) and b (1 x out).
  Var linear(Var x, Var w, Var b);
  Var add(Var a, Var b);
  // a * wa + b * wb for equally shaped inputs.
  Var weighted_sum(Var a, double wa, Var b, double wb);
  Var gelu(Var a);
  Var relu(Var a);
  // Row-wise normalization with affine gamma, beta (1 x cols).
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var gather_rows(Var table, std::vector<std::size_t> rows);
  Var reshape(Var a, std::size_t rows, std::size_t cols);
  // Multi-head scaled dot-product self-attention over consecutive blocks of
  // `seq_len` rows; q, k, v are (blocks * seq_len) x d_model.
  Var attention(Var q, Var k, Var v, std::size_t heads, std::size_t seq_len);
  // sum(mask * (pred - target)^2) / sum(mask); 0 when the mask is empty.
  Var masked_mse(Var pred, const Matrix& target, const Matrix& mask);
  // NT-Xent over 2B cosine-normalized rows; row i of a and row i of b are
  // positives, every other row is a negative. Mean over the 2B anchors.
  Var nt_xent(Var a, Var b, double temperature);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void()> backward;
    std::optional<std::size_t> param;
  };

  Var push(Matrix value, std::function<void()> backward = nullptr);
  Matrix& g(std::size_t id) { return nodes_[id].grad; }
  const Matrix& v(std::size_t id) const { return nodes_[id].value; }

  ParameterStore* params_;
  const ParameterStore* read_;
  std::vector<Node> nodes_;
};

}  // namespace hz::ad
