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

#include "hz/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hz/core/error.hpp"
#include "hz/simd/kernels.hpp"

namespace hz::nn {
namespace {

// tanh approximation of GELU.
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

void CheckShapes(const ModelWeights& w, const Architecture& arch, const Matrix& x) {
  require(w.matches(arch), ErrorKind::kShapeMismatch,
          "weights do not match architecture " + arch.describe());
  require(x.cols() == arch.input_dim(), ErrorKind::kShapeMismatch,
          "input has " + std::to_string(x.cols()) + " features, arch expects " +
              std::to_string(arch.input_dim()));
}

// out = in * W^T + b
Matrix Affine(const ModelWeights& w, std::size_t l, const Matrix& in) {
  const LayerShape& s = w.shape(l);
  Matrix out(in.rows(), s.out_dim);
  simd::gemm_nt(in.data(), w.weight(l).data(), out.data(), in.rows(), s.in_dim, s.out_dim);
  const auto bias = w.bias(l);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double* row = out.data() + r * s.out_dim;
    for (std::size_t c = 0; c < s.out_dim; ++c) row[c] += bias[c];
  }
  return out;
}

// Softmax probabilities per row, and the mean cross entropy against labels.
double SoftmaxCrossEntropy(const Matrix& logits, std::span<const int> labels, Matrix* probs) {
  double loss = 0.0;
  if (probs) *probs = Matrix(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    loss += log_z - row[static_cast<std::size_t>(labels[r])];
    if (probs) {
      for (std::size_t c = 0; c < row.size(); ++c) (*probs)(r, c) = std::exp(row[c] - log_z);
    }
  }
  return loss / static_cast<double>(logits.rows());
}

void CheckLabels(std::span<const int> labels, const Matrix& x, const Architecture& arch) {
  require(labels.size() == x.rows(), ErrorKind::kShapeMismatch,
          "label count differs from batch size");
  for (int y : labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < arch.output_dim(),
            ErrorKind::kInvalidArgument, "label out of range: " + std::to_string(y));
  }
}

}  // namespace

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kTanh: return std::tanh(x);
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::kGelu:
      return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
  }
  return x;
}

double activate_derivative(Activation a, double x) {
  switch (a) {
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::kRelu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case Activation::kGelu: {
      const double u = kGeluC * (x + kGeluA * x * x * x);
      const double t = std::tanh(u);
      const double du = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
      return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
    }
  }
  return 1.0;
}

Matrix forward(const ModelWeights& w, const Architecture& arch, const Matrix& x,
               ForwardCache* cache) {
  CheckShapes(w, arch, x);
  if (cache) {
    cache->pre.clear();
    cache->post.clear();
    cache->post.push_back(x);
  }
  Matrix a = x;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    Matrix n = Affine(w, l, a);
    const bool last = l + 1 == arch.num_layers();
    if (last) {
      a = n;
    } else {
      a = Matrix(n.rows(), n.cols());
      for (std::size_t i = 0; i < n.size(); ++i) a.data()[i] = activate(arch.activation, n.data()[i]);
    }
    if (cache) {
      cache->pre.push_back(std::move(n));
      cache->post.push_back(a);
    }
  }
  return a;
}

Matrix hidden_activations(const ModelWeights& w, const Architecture& arch, const Matrix& x,
                          std::size_t layer) {
  require(layer + 1 < arch.num_layers(), ErrorKind::kInvalidArgument,
          "hidden_activations: layer " + std::to_string(layer) + " is not hidden");
  ForwardCache cache;
  forward(w, arch, x, &cache);
  return cache.post[layer + 1];
}

std::vector<int> predict(const ModelWeights& w, const Architecture& arch, const Matrix& x) {
  const Matrix logits = forward(w, arch, x);
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

LossAndGradient backward(const ModelWeights& w, const Architecture& arch, const Matrix& x,
                         std::span<const int> labels) {
  CheckLabels(labels, x, arch);
  ForwardCache cache;
  const Matrix logits = forward(w, arch, x, &cache);
  LossAndGradient out;
  out.gradient = ModelWeights(arch);
  Matrix delta;
  out.loss = SoftmaxCrossEntropy(logits, labels, &delta);
  const double inv_batch = 1.0 / static_cast<double>(x.rows());
  for (std::size_t r = 0; r < delta.rows(); ++r) {
    delta(r, static_cast<std::size_t>(labels[r])) -= 1.0;
  }
  for (double& v : delta.values()) v *= inv_batch;

  for (std::size_t l = arch.num_layers(); l-- > 0;) {
    const LayerShape& s = arch.layers[l];
    const Matrix& a_prev = cache.post[l];
    // dW = delta^T a_prev, db = column sums of delta
    simd::gemm_tn(delta.data(), a_prev.data(), out.gradient.weight(l).data(), s.out_dim,
                  delta.rows(), s.in_dim);
    auto gb = out.gradient.bias(l);
    for (std::size_t r = 0; r < delta.rows(); ++r)
      for (std::size_t c = 0; c < s.out_dim; ++c) gb[c] += delta(r, c);
    if (l == 0) break;
    Matrix prev(delta.rows(), s.in_dim);
    simd::gemm_nn(delta.data(), w.weight(l).data(), prev.data(), delta.rows(), s.out_dim,
                  s.in_dim);
    const Matrix& n_prev = cache.pre[l - 1];
    for (std::size_t i = 0; i < prev.size(); ++i) {
      prev.data()[i] *= activate_derivative(arch.activation, n_prev.data()[i]);
    }
    delta = std::move(prev);
  }
  return out;
}

double cross_entropy(const ModelWeights& w, const Architecture& arch, const Matrix& x,
                     std::span<const int> labels) {
  CheckLabels(labels, x, arch);
  return SoftmaxCrossEntropy(forward(w, arch, x), labels, nullptr);
}

EvalResult evaluate(const ModelWeights& w, const Architecture& arch, const Matrix& x,
                    std::span<const int> labels) {
  require(x.rows() > 0, ErrorKind::kInvalidArgument, "evaluate: empty split");
  CheckLabels(labels, x, arch);
  const Matrix logits = forward(w, arch, x);
  EvalResult r;
  r.loss = SoftmaxCrossEntropy(logits, labels, nullptr);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const auto pred = std::max_element(row.begin(), row.end()) - row.begin();
    if (pred == labels[i]) ++correct;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(logits.rows());
  if (!std::isfinite(r.loss)) r.loss = std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace hz::nn
