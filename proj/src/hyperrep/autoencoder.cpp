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

#include "hz/hyperrep/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"

namespace hz::hyperrep {

void AEConfig::validate() const {
  require(d_t >= 1 && d_z >= 1 && d_model >= 1 && depth >= 1 && heads >= 1 && ff_mult >= 1,
          ErrorKind::kInvalidArgument, "ae config: dimensions must be positive");
  require(d_model % heads == 0, ErrorKind::kInvalidArgument, "ae config: heads must divide d_model");
  require(d_z < d_t, ErrorKind::kInvalidArgument, "ae config: d_z must be smaller than d_t");
  require(window >= 1 && head_hidden >= 1 && head_out >= 1, ErrorKind::kInvalidArgument,
          "ae config: window and projection head sizes must be positive");
}

nlohmann::json AEConfig::to_json() const {
  return {{"d_t", d_t},           {"d_z", d_z},
          {"d_model", d_model},   {"depth", depth},
          {"heads", heads},       {"ff_mult", ff_mult},
          {"window", window},     {"head_hidden", head_hidden},
          {"head_layers", head_layers}, {"head_out", head_out}};
}

AEConfig AEConfig::from_json(const nlohmann::json& j) {
  AEConfig c;
  auto get = [&](const char* key, std::size_t& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::size_t>();
  };
  get("d_t", c.d_t);
  get("d_z", c.d_z);
  get("d_model", c.d_model);
  get("depth", c.depth);
  get("heads", c.heads);
  get("ff_mult", c.ff_mult);
  get("window", c.window);
  get("head_hidden", c.head_hidden);
  get("head_layers", c.head_layers);
  get("head_out", c.head_out);
  return c;
}

namespace {

Matrix Normal(std::size_t rows, std::size_t cols, double std, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = std * standard_normal(rng);
  return m;
}

}  // namespace

std::size_t Autoencoder::AddLinear(const std::string& name, std::size_t out, std::size_t in,
                                   Rng& rng) {
  const std::size_t w = params_.add(name + ".w", Normal(out, in, 1.0 / std::sqrt(in), rng));
  params_.add(name + ".b", Matrix(1, out));
  return w;
}

Autoencoder::Stack Autoencoder::AddStack(const std::string& prefix, Rng& rng) {
  const std::size_t d = config_.d_model, ff = config_.ff_mult * d;
  std::size_t layers = arch_.num_layers(), max_k = 0;
  for (const auto& p : positions_) max_k = std::max(max_k, p[2] + 1);
  Stack s;
  s.pos_n = params_.add(prefix + ".pos_n", Normal(positions_.size(), d, 0.1, rng));
  s.pos_l = params_.add(prefix + ".pos_l", Normal(layers, d, 0.1, rng));
  s.pos_k = params_.add(prefix + ".pos_k", Normal(max_k, d, 0.1, rng));
  for (std::size_t i = 0; i < config_.depth; ++i) {
    const std::string p = prefix + ".block" + std::to_string(i);
    Block b;
    b.ln1_g = params_.add(p + ".ln1.g", Matrix(1, d, 1.0));
    b.ln1_b = params_.add(p + ".ln1.b", Matrix(1, d));
    b.wq = AddLinear(p + ".q", d, d, rng);
    b.bq = b.wq + 1;
    b.wk = AddLinear(p + ".k", d, d, rng);
    b.bk = b.wk + 1;
    b.wv = AddLinear(p + ".v", d, d, rng);
    b.bv = b.wv + 1;
    b.wo = AddLinear(p + ".o", d, d, rng);
    b.bo = b.wo + 1;
    b.ln2_g = params_.add(p + ".ln2.g", Matrix(1, d, 1.0));
    b.ln2_b = params_.add(p + ".ln2.b", Matrix(1, d));
    b.f1 = AddLinear(p + ".ff1", ff, d, rng);
    b.fb1 = b.f1 + 1;
    b.f2 = AddLinear(p + ".ff2", d, ff, rng);
    b.fb2 = b.f2 + 1;
    s.blocks.push_back(b);
  }
  s.lnf_g = params_.add(prefix + ".lnf.g", Matrix(1, d, 1.0));
  s.lnf_b = params_.add(prefix + ".lnf.b", Matrix(1, d));
  return s;
}

Autoencoder::Autoencoder(const AEConfig& config, const nn::Architecture& arch, std::uint64_t seed)
    : config_(config), arch_(arch) {
  config_.validate();
  arch_.validate();
  positions_ = sequence_positions(arch_, config_.d_t);
  // A window longer than the sequence degenerates to the whole sequence.
  config_.window = std::min(config_.window, positions_.size());
  Rng rng(derive_seed(seed, "autoencoder-init"));
  const std::size_t d = config_.d_model;
  embed_w_ = AddLinear("enc.embed", d, config_.d_t, rng);
  embed_b_ = embed_w_ + 1;
  enc_ = AddStack("enc", rng);
  bott_w_ = AddLinear("enc.bottleneck", config_.d_z, d, rng);
  bott_b_ = bott_w_ + 1;
  unbott_w_ = AddLinear("dec.unbottleneck", d, config_.d_z, rng);
  unbott_b_ = unbott_w_ + 1;
  dec_ = AddStack("dec", rng);
  debed_w_ = AddLinear("dec.debed", config_.d_t, d, rng);
  debed_b_ = debed_w_ + 1;
  std::size_t in = config_.window * config_.d_z;
  for (std::size_t i = 0; i <= config_.head_layers; ++i) {
    const std::size_t out = i == config_.head_layers ? config_.head_out : config_.head_hidden;
    head_w_.push_back(AddLinear("head" + std::to_string(i), out, in, rng));
    head_b_.push_back(head_w_.back() + 1);
    in = out;
  }
}

ad::Var Autoencoder::RunStack(ad::Tape& t, const Stack& s, ad::Var h,
                              const std::vector<Position>& pos, std::size_t seq_len) const {
  require(pos.size() == t.value(h).rows(), ErrorKind::kShapeMismatch,
          "autoencoder: one position per token row required");
  std::vector<std::size_t> pn(pos.size()), pl(pos.size()), pk(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    pn[i] = pos[i][0];
    pl[i] = pos[i][1];
    pk[i] = pos[i][2];
  }
  h = t.add(h, t.gather_rows(t.param(s.pos_n), std::move(pn)));
  h = t.add(h, t.gather_rows(t.param(s.pos_l), std::move(pl)));
  h = t.add(h, t.gather_rows(t.param(s.pos_k), std::move(pk)));
  for (const Block& b : s.blocks) {
    const ad::Var x = t.layer_norm(h, t.param(b.ln1_g), t.param(b.ln1_b));
    const ad::Var q = t.linear(x, t.param(b.wq), t.param(b.bq));
    const ad::Var k = t.linear(x, t.param(b.wk), t.param(b.bk));
    const ad::Var v = t.linear(x, t.param(b.wv), t.param(b.bv));
    const ad::Var a = t.attention(q, k, v, config_.heads, seq_len);
    h = t.add(h, t.linear(a, t.param(b.wo), t.param(b.bo)));
    const ad::Var y = t.layer_norm(h, t.param(b.ln2_g), t.param(b.ln2_b));
    const ad::Var f = t.gelu(t.linear(y, t.param(b.f1), t.param(b.fb1)));
    h = t.add(h, t.linear(f, t.param(b.f2), t.param(b.fb2)));
  }
  return t.layer_norm(h, t.param(s.lnf_g), t.param(s.lnf_b));
}

ad::Var Autoencoder::encode(ad::Tape& t, const Matrix& tokens, const std::vector<Position>& pos,
                            std::size_t seq_len) const {
  require(tokens.cols() == config_.d_t, ErrorKind::kShapeMismatch,
          "encode: token width differs from d_t");
  ad::Var h = t.linear(t.constant(tokens), t.param(embed_w_), t.param(embed_b_));
  h = RunStack(t, enc_, h, pos, seq_len);
  return t.linear(h, t.param(bott_w_), t.param(bott_b_));
}

ad::Var Autoencoder::decode(ad::Tape& t, ad::Var z, const std::vector<Position>& pos,
                            std::size_t seq_len) const {
  require(t.value(z).cols() == config_.d_z, ErrorKind::kShapeMismatch,
          "decode: latent width differs from d_z");
  ad::Var h = t.linear(z, t.param(unbott_w_), t.param(unbott_b_));
  h = RunStack(t, dec_, h, pos, seq_len);
  return t.linear(h, t.param(debed_w_), t.param(debed_b_));
}

ad::Var Autoencoder::project(ad::Tape& t, ad::Var z) const {
  const std::size_t rows = t.value(z).rows(), w = config_.window;
  require(rows % w == 0, ErrorKind::kShapeMismatch,
          "project: latent rows must form whole training windows");
  ad::Var h = t.reshape(z, rows / w, w * config_.d_z);
  for (std::size_t i = 0; i < head_w_.size(); ++i) {
    h = t.linear(h, t.param(head_w_[i]), t.param(head_b_[i]));
    if (i + 1 < head_w_.size()) h = t.relu(h);
  }
  return h;
}

Matrix Autoencoder::encode(const Matrix& tokens, const std::vector<Position>& pos) const {
  ad::Tape t(&params_);
  return t.value(encode(t, tokens, pos, tokens.rows()));
}

Matrix Autoencoder::decode(const Matrix& z, const std::vector<Position>& pos) const {
  ad::Tape t(&params_);
  return t.value(decode(t, t.constant(z), pos, z.rows()));
}

LossTerms composite_loss(ad::Tape& t, const Autoencoder& ae, const TrainingBatch& batch,
                         double gamma, double temperature) {
  require(gamma >= 0.0 && gamma <= 1.0, ErrorKind::kInvalidArgument,
          "composite_loss: gamma must be in [0, 1]");
  const std::size_t w = ae.config().window;
  const ad::Var z1 = ae.encode(t, batch.view1, batch.positions, w);
  const ad::Var rec =
      t.masked_mse(ae.decode(t, z1, batch.positions, w), batch.view1, batch.mask);
  LossTerms out;
  out.reconstruction = t.value(rec)(0, 0);
  if (gamma == 0.0) {
    out.total = rec;
    return out;
  }
  const ad::Var z2 = ae.encode(t, batch.view2, batch.positions, w);
  const ad::Var con = t.nt_xent(ae.project(t, z1), ae.project(t, z2), temperature);
  out.contrastive = t.value(con)(0, 0);
  out.total = t.weighted_sum(rec, 1.0 - gamma, con, gamma);
  return out;
}

}  // namespace hz::hyperrep
