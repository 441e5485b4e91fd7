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
#include <functional>
#include <string>
#include <vector>

#include "hz/data/tetris.hpp"
#include "hz/hyperrep/hyperrep.hpp"
#include "hz/nn/optimizer.hpp"
#include "hz/sampler/kde.hpp"
#include "hz/zoo/zoo.hpp"

namespace hz::sampler {

using MetricFn = std::function<double(const nn::ModelWeights&)>;

// Accuracy on the validation split; non-finite weights score 0. `data` must
// outlive the returned function.
MetricFn validation_accuracy(const data::DatasetSplits& data, const nn::Architecture& arch);

struct Candidate {
  std::size_t index = 0;  // draw order
  Matrix latent;
  nn::ModelWeights weights;
  double metric = 0.0;  // zero-shot, before any fine-tuning
};

struct SampleBatch {
  std::vector<Candidate> candidates;
  std::vector<std::size_t> selected;  // indices into candidates, best first

  double candidate_mean() const;
  double selected_mean() const;
  std::vector<nn::ModelWeights> selected_weights() const;
};

// Decodes latents, scores every candidate and keeps the top m by metric,
// ties going to the lower draw index. Scoring runs in parallel.
SampleBatch score_and_select(const hyperrep::HyperRep& hr, std::vector<Matrix> latents,
                             std::size_t m, const MetricFn& metric, std::size_t parallelism = 1);

std::vector<nn::ModelWeights> decode_samples(const hyperrep::HyperRep& hr,
                                             const std::vector<Matrix>& latents);

SampleBatch subsample(const hyperrep::HyperRep& hr, const TokenKDE& kde, std::size_t k,
                      std::size_t m, const MetricFn& metric, std::uint64_t seed,
                      std::size_t parallelism = 1);

struct BootstrapIteration {
  std::size_t iteration = 0;  // 1-based
  std::string source;         // "kde" or "gaussian"
  std::vector<Matrix> anchors;  // latents the iteration sampled around
  double mean_bandwidth = 0.0;
  std::string conditioning;  // normalization-statistics step; a no-op here
  SampleBatch batch;
};

struct BootstrapResult {
  std::vector<BootstrapIteration> iterations;
  const SampleBatch& final_batch() const { return iterations.back().batch; }
  std::vector<double> best_means() const;
};

// Iteration 1 samples from the start distribution; every later iteration
// refits a KDE on the embeddings of the previous iteration's best m models.
// Refitting per token would recombine tokens of the few winners, so the
// refit anchors whole sequences by default.
BootstrapResult bootstrap(const hyperrep::HyperRep& hr, const TokenKDE& start,
                          std::size_t iterations, std::size_t k, std::size_t m,
                          const MetricFn& metric, std::uint64_t seed,
                          AnchorMode refit = AnchorMode::kPerSample, std::size_t parallelism = 1);
BootstrapResult bootstrap(const hyperrep::HyperRep& hr, const GaussianPrior& start,
                          std::size_t iterations, std::size_t k, std::size_t m,
                          const MetricFn& metric, std::uint64_t seed,
                          AnchorMode refit = AnchorMode::kPerSample, std::size_t parallelism = 1);

// Ids of the ceil(fraction * M) trajectories with the best final viable
// validation accuracy (ties to the lower id), best first.
std::vector<std::size_t> kde30_anchors(const zoo::Zoo& zoo, double fraction = 0.3,
                                       const std::vector<zoo::Split>& splits = {zoo::Split::kTrain});

struct FinetuneOptions {
  std::size_t epochs = 5;
  nn::OptimizerConfig optimizer;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
};

struct FinetuneTable {
  std::vector<std::size_t> epochs;         // reported epochs, 0 first
  std::vector<std::vector<double>> accuracy;  // [model][reported epoch], test split
  std::vector<double> mean() const;
};

// Reports epochs {0, 1, 5, 25, ...} up to options.epochs plus the final one.
std::vector<std::size_t> report_epochs(std::size_t epochs);
FinetuneTable finetune_eval(const std::vector<nn::ModelWeights>& models,
                            const nn::Architecture& arch, const data::DatasetSplits& data,
                            const FinetuneOptions& options);

// Baseline without an autoencoder: KDE per flattened parameter.
std::vector<nn::ModelWeights> weight_space_kde_sample(const std::vector<nn::ModelWeights>& models,
                                                      std::size_t k, std::uint64_t seed);

// One single-checkpoint trajectory per selected sample (or every candidate),
// with provenance carrying strategy, draw index and `extra`.
zoo::Zoo sample_zoo(const SampleBatch& batch, const nn::Architecture& arch,
                    const data::DatasetSplits& data, const std::string& strategy,
                    const nlohmann::json& extra, bool selected_only = true);

}  // namespace hz::sampler
