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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hz/data/tetris.hpp"
#include "hz/nn/architecture.hpp"
#include "hz/nn/init.hpp"
#include "hz/nn/optimizer.hpp"
#include "hz/nn/weights.hpp"
#include "hz/symmetry/permutation_set.hpp"
#include "json.hpp"

namespace hz::zoo {

struct DatasetSpec {
  std::size_t n_per_class = 100;
  double pixel_noise_sigma = 0.05;
  std::uint64_t seed = 0;
};

struct HyperGrid {
  std::vector<nn::InitMethod> inits{nn::InitMethod::kUniform};
  std::vector<nn::Activation> activations{nn::Activation::kTanh};
  std::vector<nn::OptimizerKind> optimizers{nn::OptimizerKind::kAdam};
  std::vector<double> learning_rates{2e-2};
  std::vector<double> weight_decays{0.0};

  std::size_t node_count() const;
};

struct SeedPolicy {
  enum class Kind { kSeedSweep, kFixedSeeds, kRandomSeeds };
  Kind kind = Kind::kSeedSweep;
  std::vector<std::uint64_t> seeds;  // sweep / fixed
  std::size_t count = 0;             // random

  static SeedPolicy sweep(std::uint64_t first, std::size_t n);
  static SeedPolicy fixed(std::vector<std::uint64_t> seeds);
  static SeedPolicy random(std::size_t n);
};

std::string_view to_string(SeedPolicy::Kind k);

// The {dataset, hyperparameters, architecture} configuration of a zoo.
struct GeneratingFactors {
  DatasetSpec dataset;
  std::vector<std::size_t> widths{16, 5, 4};
  HyperGrid grid;
  SeedPolicy seeds = SeedPolicy::sweep(1, 10);
  std::size_t epochs = 25;
  std::size_t batch_size = 16;
  std::uint64_t global_seed = 0;
  // A checkpoint with |train loss| above this, or any non-finite value, is
  // non-viable.
  double nonviable_loss_threshold = 1e3;

  void validate() const;
};

// Seed zoo: one hyperparameter node, `models` seeds.
GeneratingFactors seed_config(std::size_t models, std::size_t epochs, std::uint64_t global_seed);
// Hyp-rand zoo: broad grid, `seeds_per_node` random seeds per node.
GeneratingFactors hyp_rand_config(std::size_t seeds_per_node, std::size_t epochs,
                                  std::uint64_t global_seed);

struct Metrics {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
};

struct Checkpoint {
  std::size_t epoch = 0;
  nn::ModelWeights weights;
  Metrics metrics;
  bool viable = true;
};

enum class Split { kTrain, kVal, kTest };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct ModelConfig {
  nn::InitMethod init = nn::InitMethod::kKaimingUniform;
  nn::Activation activation = nn::Activation::kTanh;
  nn::OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  std::size_t node = 0;
};

struct Trajectory {
  std::size_t model_id = 0;
  ModelConfig config;
  Split split = Split::kTrain;
  std::vector<Checkpoint> checkpoints;  // index == epoch
  // Permutation applied by canonicalization, if any.
  std::optional<symmetry::PermutationSet> alignment;
  // Free-form provenance, e.g. for sampled models.
  nlohmann::json provenance;

  // Last checkpoint that is viable, or nullptr.
  const Checkpoint* final_viable() const;
};

struct Zoo {
  GeneratingFactors factors;
  std::vector<Trajectory> models;

  nn::Architecture architecture_of(const Trajectory& t) const;
  std::vector<const Trajectory*> in_split(Split s) const;
  const Trajectory* find(std::size_t model_id) const;
};

// The dataset splits a zoo is trained and evaluated on.
data::DatasetSplits zoo_dataset(const DatasetSpec& spec);

bool checkpoint_viable(const Checkpoint& c, double loss_threshold);

// Trains one trajectory per grid node x seed with checkpoints at every epoch
// (0 = before training). Work is spread over `parallelism` threads; results
// do not depend on it. Diverging models are flagged, never thrown.
Zoo generate_zoo(const GeneratingFactors& factors, std::size_t parallelism = 1);

// Trajectory-level random split; each model lands in exactly one split.
void assign_splits(Zoo& zoo, const data::SplitRatios& ratios, std::uint64_t seed);

}  // namespace hz::zoo
