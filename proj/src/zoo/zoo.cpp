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

#include "hz/zoo/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hz/core/error.hpp"
#include "hz/core/parallel.hpp"
#include "hz/core/rng.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/nn/train.hpp"

namespace hz::zoo {

std::size_t HyperGrid::node_count() const {
  return inits.size() * activations.size() * optimizers.size() * learning_rates.size() *
         weight_decays.size();
}

SeedPolicy SeedPolicy::sweep(std::uint64_t first, std::size_t n) {
  SeedPolicy p;
  p.kind = Kind::kSeedSweep;
  for (std::size_t i = 0; i < n; ++i) p.seeds.push_back(first + i);
  return p;
}

SeedPolicy SeedPolicy::fixed(std::vector<std::uint64_t> seeds) {
  SeedPolicy p;
  p.kind = Kind::kFixedSeeds;
  p.seeds = std::move(seeds);
  return p;
}

SeedPolicy SeedPolicy::random(std::size_t n) {
  SeedPolicy p;
  p.kind = Kind::kRandomSeeds;
  p.count = n;
  return p;
}

std::string_view to_string(SeedPolicy::Kind k) {
  switch (k) {
    case SeedPolicy::Kind::kSeedSweep: return "seed_sweep";
    case SeedPolicy::Kind::kFixedSeeds: return "fixed_seeds";
    case SeedPolicy::Kind::kRandomSeeds: return "random_seeds";
  }
  return "?";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw Error(ErrorKind::kParse, "unknown split: " + std::string(s));
}

void GeneratingFactors::validate() const {
  require(grid.node_count() > 0, ErrorKind::kInvalidArgument, "zoo: empty hyperparameter grid");
  require(epochs >= 1, ErrorKind::kInvalidArgument, "zoo: epochs must be >= 1");
  require(batch_size >= 1, ErrorKind::kInvalidArgument, "zoo: batch size must be >= 1");
  const std::size_t per_node =
      seeds.kind == SeedPolicy::Kind::kRandomSeeds ? seeds.count : seeds.seeds.size();
  require(per_node > 0, ErrorKind::kInvalidArgument, "zoo: seed policy yields no seeds");
  nn::Architecture::from_widths(widths);
  for (double lr : grid.learning_rates)
    require(lr > 0.0, ErrorKind::kInvalidArgument, "zoo: learning rates must be > 0");
}

GeneratingFactors seed_config(std::size_t models, std::size_t epochs, std::uint64_t global_seed) {
  GeneratingFactors f;
  f.seeds = SeedPolicy::sweep(1, models);
  f.epochs = epochs;
  f.global_seed = global_seed;
  f.dataset.seed = global_seed;
  return f;
}

GeneratingFactors hyp_rand_config(std::size_t seeds_per_node, std::size_t epochs,
                                  std::uint64_t global_seed) {
  GeneratingFactors f;
  f.grid.inits = {nn::InitMethod::kUniform, nn::InitMethod::kNormal,
                  nn::InitMethod::kKaimingUniform, nn::InitMethod::kXavierNormal};
  f.grid.activations = {nn::Activation::kTanh, nn::Activation::kRelu,
                        nn::Activation::kSigmoid, nn::Activation::kGelu};
  f.grid.optimizers = {nn::OptimizerKind::kAdam, nn::OptimizerKind::kSgd};
  f.grid.learning_rates = {1e-3, 2e-2};
  f.grid.weight_decays = {0.0, 1e-3};
  f.seeds = SeedPolicy::random(seeds_per_node);
  f.epochs = epochs;
  f.global_seed = global_seed;
  f.dataset.seed = global_seed;
  return f;
}

const Checkpoint* Trajectory::final_viable() const {
  for (auto it = checkpoints.rbegin(); it != checkpoints.rend(); ++it)
    if (it->viable) return &*it;
  return nullptr;
}

nn::Architecture Zoo::architecture_of(const Trajectory& t) const {
  return nn::Architecture::from_widths(factors.widths, t.config.activation);
}

std::vector<const Trajectory*> Zoo::in_split(Split s) const {
  std::vector<const Trajectory*> out;
  for (const auto& t : models)
    if (t.split == s) out.push_back(&t);
  return out;
}

const Trajectory* Zoo::find(std::size_t model_id) const {
  for (const auto& t : models)
    if (t.model_id == model_id) return &t;
  return nullptr;
}

data::DatasetSplits zoo_dataset(const DatasetSpec& spec) {
  const auto ds = data::gen_tetris(spec.n_per_class, spec.pixel_noise_sigma, spec.seed);
  return data::split(ds, {}, derive_seed(spec.seed, "dataset-split"));
}

bool checkpoint_viable(const Checkpoint& c, double loss_threshold) {
  const Metrics& m = c.metrics;
  for (double v : {m.train_loss, m.train_acc, m.val_loss, m.val_acc, m.test_loss, m.test_acc})
    if (!std::isfinite(v)) return false;
  return std::abs(m.train_loss) <= loss_threshold && c.weights.all_finite();
}

namespace {

std::vector<ModelConfig> ExpandConfigs(const GeneratingFactors& f) {
  std::vector<ModelConfig> out;
  const HyperGrid& g = f.grid;
  Rng seed_rng(derive_seed(f.global_seed, "random-seeds"));
  std::size_t node = 0;
  for (auto init : g.inits)
    for (auto act : g.activations)
      for (auto opt : g.optimizers)
        for (double lr : g.learning_rates)
          for (double wd : g.weight_decays) {
            ModelConfig base;
            base.init = init;
            base.activation = act;
            base.optimizer.kind = opt;
            base.optimizer.learning_rate = lr;
            base.optimizer.weight_decay = wd;
            base.node = node++;
            if (f.seeds.kind == SeedPolicy::Kind::kRandomSeeds) {
              for (std::size_t i = 0; i < f.seeds.count; ++i) {
                base.seed = seed_rng() % 1000000007ULL;
                out.push_back(base);
              }
            } else {
              for (auto s : f.seeds.seeds) {
                base.seed = s;
                out.push_back(base);
              }
            }
          }
  return out;
}

Metrics Measure(const nn::ModelWeights& w, const nn::Architecture& arch,
                const data::DatasetSplits& d) {
  Metrics m;
  const auto tr = nn::evaluate(w, arch, d.train.samples, d.train.labels);
  const auto va = nn::evaluate(w, arch, d.val.samples, d.val.labels);
  const auto te = nn::evaluate(w, arch, d.test.samples, d.test.labels);
  m.train_loss = tr.loss;
  m.train_acc = tr.accuracy;
  m.val_loss = va.loss;
  m.val_acc = va.accuracy;
  m.test_loss = te.loss;
  m.test_acc = te.accuracy;
  return m;
}

Trajectory TrainTrajectory(const GeneratingFactors& f, const ModelConfig& cfg, std::size_t id,
                           const data::DatasetSplits& d) {
  const auto arch = nn::Architecture::from_widths(f.widths, cfg.activation);
  Trajectory t;
  t.model_id = id;
  t.config = cfg;
  const std::uint64_t model_seed = derive_seed(f.global_seed, "model", cfg.seed);
  nn::ModelWeights w = nn::init_weights(arch, cfg.init, model_seed);
  nn::OptimizerState state;
  Rng batch_rng(derive_seed(model_seed, "batches", cfg.node));
  for (std::size_t epoch = 0; epoch <= f.epochs; ++epoch) {
    if (epoch > 0 && w.all_finite()) {
      nn::train_batches(w, arch, d.train.samples, d.train.labels,
                        nn::epoch_batches(d.train.size(), f.batch_size, batch_rng), cfg.optimizer,
                        state);
    }
    Checkpoint c;
    c.epoch = epoch;
    c.weights = w;
    c.metrics = Measure(w, arch, d);
    c.viable = checkpoint_viable(c, f.nonviable_loss_threshold);
    t.checkpoints.push_back(std::move(c));
  }
  return t;
}

}  // namespace

Zoo generate_zoo(const GeneratingFactors& factors, std::size_t parallelism) {
  factors.validate();
  const auto configs = ExpandConfigs(factors);
  const auto data = zoo_dataset(factors.dataset);
  Zoo zoo;
  zoo.factors = factors;
  zoo.models.resize(configs.size());
  parallel_for(configs.size(), parallelism, [&](std::size_t i) {
    zoo.models[i] = TrainTrajectory(factors, configs[i], i, data);
  });
  assign_splits(zoo, {}, derive_seed(factors.global_seed, "zoo-splits"));
  return zoo;
}

void assign_splits(Zoo& zoo, const data::SplitRatios& ratios, std::uint64_t seed) {
  require(std::abs(ratios.train + ratios.val + ratios.test - 1.0) <= 1e-9 && ratios.train >= 0 &&
              ratios.val >= 0 && ratios.test >= 0,
          ErrorKind::kInvalidArgument, "assign_splits: invalid ratios");
  const std::size_t m = zoo.models.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "assign-splits"));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(m)));
  const auto n_val = std::min(
      m - n_train, static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(m))));
  for (std::size_t i = 0; i < m; ++i) {
    zoo.models[order[i]].split =
        i < n_train ? Split::kTrain : (i < n_train + n_val ? Split::kVal : Split::kTest);
  }
}

}  // namespace hz::zoo
