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
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "hz/hyperrep/autoencoder.hpp"
#include "hz/hyperrep/inference.hpp"
#include "hz/hyperrep/tokens.hpp"
#include "hz/zoo/zoo.hpp"
#include "json.hpp"

namespace hz::hyperrep {

struct PretrainConfig {
  AEConfig ae;
  double gamma = 0.05;
  double temperature = 0.1;
  double learning_rate = 1e-3;
  double view_noise = 0.01;  // relative noise on the permuted second view
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::size_t windows_per_sample = 0;  // 0 = ceil(N / window)
  bool align = true;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;  // zoo canonicalization only

  void validate() const;
  nlohmann::json to_json() const;
  static PretrainConfig from_json(const nlohmann::json& j);
};

// A trained autoencoder with the population statistics and alignment
// reference needed to embed new models the same way.
struct HyperRep {
  Autoencoder ae;
  LayerNormStats stats;
  PretrainConfig config;
  std::optional<nn::ModelWeights> reference;  // raw weights, when aligned

  // Aligns (when a reference exists), standardizes and tokenizes.
  Matrix prepare_tokens(const nn::ModelWeights& w) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t batches = 0;  // cumulative optimizer steps
  double loss = 0.0;
  double reconstruction = 0.0;
  double contrastive = 0.0;
  double val_reconstruction = 0.0;
};

struct PretrainResult {
  HyperRep model;
  std::vector<EpochRecord> curve;
  zoo::Zoo prepared;  // canonicalized copy when aligning, else the input
};

// Lowest-id train-split trajectory with a viable checkpoint.
std::size_t default_reference(const zoo::Zoo& zoo);

// Viable checkpoint weights of one split, in trajectory then epoch order.
std::vector<nn::ModelWeights> split_weights(const zoo::Zoo& zoo, zoo::Split split);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Standardizes with train-split statistics, optionally aligns the zoo to
// default_reference(), and trains on random windows of every viable
// train-split checkpoint. View one is the window itself; view two is the
// same window indices of a freshly permuted and noised copy. Epoch 0 in the
// curve is the untrained model.
PretrainResult pretrain(const zoo::Zoo& zoo, const PretrainConfig& config,
                        const EpochCallback& on_epoch = nullptr);

// Per-token latents of a model (aligned and standardized first).
Matrix embed_model(const HyperRep& hr, const nn::ModelWeights& w, InferenceWindow win = {});
std::vector<Matrix> embed_models(const HyperRep& hr, const std::vector<nn::ModelWeights>& ws,
                                 InferenceWindow win = {});
// Latents back to raw-scale weights.
std::vector<nn::ModelWeights> decode_models(const HyperRep& hr, const std::vector<Matrix>& z,
                                            InferenceWindow win = {});

struct ReconstructionScore {
  double loss = 0.0;  // mean masked squared error per signal element
  double r2 = 0.0;    // 1 - SSE / SST with SST around the per-parameter mean
};

// Scored in standardized space; models are aligned first when the bundle
// holds a reference.
ReconstructionScore reconstruction_score(const HyperRep& hr,
                                         const std::vector<nn::ModelWeights>& models,
                                         InferenceWindow win = {});

void save_hyperrep(const HyperRep& hr, const std::filesystem::path& file);
HyperRep load_hyperrep(const std::filesystem::path& file);

// "model_id,token,z0,..." rows.
void write_embeddings_csv(const std::filesystem::path& file, const std::vector<std::size_t>& ids,
                          const std::vector<Matrix>& latents, std::uint64_t config_hash);

}  // namespace hz::hyperrep
