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
#include <cstdint>
#include <vector>

#include "hz/autodiff/tape.hpp"
#include "hz/core/rng.hpp"
#include "hz/hyperrep/tokens.hpp"
#include "hz/nn/architecture.hpp"
#include "json.hpp"

namespace hz::hyperrep {

struct AEConfig {
  std::size_t d_t = 17;
  std::size_t d_z = 8;
  std::size_t d_model = 32;
  std::size_t depth = 2;  // encoder blocks; the decoder mirrors it
  std::size_t heads = 2;
  std::size_t ff_mult = 2;
  std::size_t window = 4;  // training window; the projection head reads window * d_z
  std::size_t head_hidden = 400;
  std::size_t head_layers = 4;
  std::size_t head_out = 50;

  void validate() const;
  nlohmann::json to_json() const;
  static AEConfig from_json(const nlohmann::json& j);
};

// Transformer autoencoder over token windows. Positions enter through three
// learned additive tables (global index, layer, index in layer), kept
// separately for encoder and decoder. A linear bottleneck maps to d_z per
// token; the projection head maps a whole window of latents to head_out.
class Autoencoder {
 public:
  Autoencoder() = default;
  Autoencoder(const AEConfig& config, const nn::Architecture& arch, std::uint64_t seed);

  const AEConfig& config() const { return config_; }
  const nn::Architecture& architecture() const { return arch_; }
  std::size_t sequence_length() const { return positions_.size(); }
  const std::vector<Position>& positions() const { return positions_; }
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }

  // Rows are consecutive windows of `seq_len` tokens each.
  ad::Var encode(ad::Tape& t, const Matrix& tokens, const std::vector<Position>& pos,
                 std::size_t seq_len) const;
  ad::Var decode(ad::Tape& t, ad::Var z, const std::vector<Position>& pos,
                 std::size_t seq_len) const;
  // z rows grouped in windows of config().window tokens.
  ad::Var project(ad::Tape& t, ad::Var z) const;

  Matrix encode(const Matrix& tokens, const std::vector<Position>& pos) const;
  Matrix decode(const Matrix& z, const std::vector<Position>& pos) const;

 private:
  struct Block {
    std::size_t ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, f1, fb1, f2, fb2;
  };
  struct Stack {
    std::size_t pos_n, pos_l, pos_k;
    std::vector<Block> blocks;
    std::size_t lnf_g, lnf_b;
  };

  Stack AddStack(const std::string& prefix, Rng& rng);
  ad::Var RunStack(ad::Tape& t, const Stack& s, ad::Var h, const std::vector<Position>& pos,
                   std::size_t seq_len) const;
  std::size_t AddLinear(const std::string& name, std::size_t out, std::size_t in, Rng& rng);

  AEConfig config_;
  nn::Architecture arch_;
  std::vector<Position> positions_;
  ad::ParameterStore params_;
  Stack enc_, dec_;
  std::size_t embed_w_ = 0, embed_b_ = 0, bott_w_ = 0, bott_b_ = 0;
  std::size_t unbott_w_ = 0, unbott_b_ = 0, debed_w_ = 0, debed_b_ = 0;
  std::vector<std::size_t> head_w_, head_b_;
};

// Two views of the same window indices; `mask` belongs to view one, which is
// the reconstruction target.
struct TrainingBatch {
  Matrix view1;
  Matrix view2;
  Matrix mask;
  std::vector<Position> positions;
};

struct LossTerms {
  ad::Var total;
  double reconstruction = 0.0;
  double contrastive = 0.0;
};

// (1 - gamma) * masked reconstruction of view one + gamma * NT-Xent between
// the projected views.
LossTerms composite_loss(ad::Tape& t, const Autoencoder& ae, const TrainingBatch& batch,
                         double gamma, double temperature);

}  // namespace hz::hyperrep
