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

#include "hz/hyperrep/tokens.hpp"

#include <algorithm>
#include <cmath>

#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"

namespace hz::hyperrep {

nlohmann::json LayerNormStats::to_json() const {
  return {{"mean", mean}, {"std", std}};
}

LayerNormStats LayerNormStats::from_json(const nlohmann::json& j) {
  LayerNormStats s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  require(s.mean.size() == s.std.size(), ErrorKind::kParse, "layer stats: length mismatch");
  return s;
}

LayerNormStats fit_standardizer(std::span<const nn::ModelWeights> population) {
  require(!population.empty(), ErrorKind::kInvalidArgument, "fit_standardizer: empty population");
  const auto& shapes = population.front().shapes();
  for (const auto& w : population) {
    require(w.shapes() == shapes, ErrorKind::kShapeMismatch,
            "fit_standardizer: mixed architectures");
  }
  LayerNormStats s;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& w : population) {
      for (double v : w.layer(l)) sum += v;
      n += w.layer(l).size();
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& w : population) {
      for (double v : w.layer(l)) ss += (v - mean) * (v - mean);
    }
    s.mean.push_back(mean);
    s.std.push_back(std::max(std::sqrt(ss / static_cast<double>(n)), LayerNormStats::kStdFloor));
  }
  return s;
}

namespace {

nn::ModelWeights MapLayers(const nn::ModelWeights& w, const LayerNormStats& stats, bool forward) {
  require(stats.mean.size() == w.num_layers(), ErrorKind::kShapeMismatch,
          "standardize: layer count mismatch");
  nn::ModelWeights out = w;
  for (std::size_t l = 0; l < w.num_layers(); ++l) {
    for (double& v : out.layer(l)) {
      v = forward ? (v - stats.mean[l]) / stats.std[l] : v * stats.std[l] + stats.mean[l];
    }
  }
  return out;
}

}  // namespace

nn::ModelWeights standardize(const nn::ModelWeights& w, const LayerNormStats& stats) {
  return MapLayers(w, stats, true);
}

nn::ModelWeights destandardize(const nn::ModelWeights& w, const LayerNormStats& stats) {
  return MapLayers(w, stats, false);
}

std::size_t tokens_per_row(const nn::LayerShape& shape, std::size_t d_t) {
  require(d_t >= 1, ErrorKind::kInvalidArgument, "tokenize: d_t must be >= 1");
  return (shape.in_dim + 1 + d_t - 1) / d_t;
}

std::size_t tokens_in_layer(const nn::LayerShape& shape, std::size_t d_t) {
  return shape.out_dim * tokens_per_row(shape, d_t);
}

std::size_t sequence_length(const nn::Architecture& arch, std::size_t d_t) {
  std::size_t n = 0;
  for (const auto& s : arch.layers) n += tokens_in_layer(s, d_t);
  return n;
}

std::vector<Position> sequence_positions(const nn::Architecture& arch, std::size_t d_t) {
  std::vector<Position> out;
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const std::size_t count = tokens_in_layer(arch.layers[l], d_t);
    for (std::size_t k = 0; k < count; ++k) out.push_back({out.size(), l, k});
  }
  return out;
}

TokenSequence tokenize(const nn::ModelWeights& w, std::size_t d_t) {
  require(d_t >= 1, ErrorKind::kInvalidArgument, "tokenize: d_t must be >= 1");
  nn::Architecture arch;
  arch.layers = w.shapes();
  TokenSequence ts;
  ts.positions = sequence_positions(arch, d_t);
  ts.tokens = Matrix(ts.positions.size(), d_t);
  ts.mask = Matrix(ts.positions.size(), d_t);
  std::size_t n = 0;
  for (std::size_t l = 0; l < w.num_layers(); ++l) {
    const auto& s = w.shape(l);
    const std::size_t per_row = tokens_per_row(s, d_t), slice = s.in_dim + 1;
    for (std::size_t r = 0; r < s.out_dim; ++r) {
      for (std::size_t j = 0; j < per_row; ++j, ++n) {
        for (std::size_t c = 0; c < d_t && j * d_t + c < slice; ++c) {
          const std::size_t e = j * d_t + c;
          ts.tokens(n, c) = e < s.in_dim ? w.w(l, r, e) : w.b(l, r);
          ts.mask(n, c) = 1.0;
        }
      }
    }
  }
  return ts;
}

nn::ModelWeights detokenize(const Matrix& tokens, const nn::Architecture& arch) {
  const std::size_t d_t = tokens.cols();
  require(d_t >= 1 && tokens.rows() == sequence_length(arch, d_t), ErrorKind::kShapeMismatch,
          "detokenize: token count does not match the architecture");
  nn::ModelWeights w(arch);
  std::size_t n = 0;
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const auto& s = arch.layers[l];
    const std::size_t per_row = tokens_per_row(s, d_t), slice = s.in_dim + 1;
    for (std::size_t r = 0; r < s.out_dim; ++r) {
      for (std::size_t j = 0; j < per_row; ++j, ++n) {
        for (std::size_t c = 0; c < d_t && j * d_t + c < slice; ++c) {
          const std::size_t e = j * d_t + c;
          (e < s.in_dim ? w.w(l, r, e) : w.b(l, r)) = tokens(n, c);
        }
      }
    }
  }
  return w;
}

nn::ModelWeights detokenize(const TokenSequence& ts, const nn::Architecture& arch) {
  return detokenize(ts.tokens, arch);
}

std::vector<Window> draw_windows(std::size_t sequence_length, std::size_t ws, std::size_t k,
                                 std::uint64_t seed) {
  require(sequence_length >= 1 && ws >= 1, ErrorKind::kInvalidArgument,
          "draw_windows: empty sequence or window");
  const std::size_t len = std::min(ws, sequence_length);
  Rng rng(derive_seed(seed, "windows"));
  std::vector<Window> out(k, Window{0, len});
  for (auto& w : out) w.start = uniform_index(rng, sequence_length - len + 1);
  return out;
}

Matrix slice_rows(const Matrix& m, std::size_t start, std::size_t count) {
  require(start + count <= m.rows(), ErrorKind::kShapeMismatch, "slice_rows: out of range");
  Matrix out(count, m.cols());
  std::copy_n(m.data() + start * m.cols(), count * m.cols(), out.data());
  return out;
}

}  // namespace hz::hyperrep
