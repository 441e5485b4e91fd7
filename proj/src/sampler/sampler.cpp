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

#include "hz/sampler/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hz/core/error.hpp"
#include "hz/core/parallel.hpp"
#include "hz/core/rng.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/nn/train.hpp"

namespace hz::sampler {

MetricFn validation_accuracy(const data::DatasetSplits& data, const nn::Architecture& arch) {
  return [&data, arch](const nn::ModelWeights& w) {
    if (!w.all_finite()) return 0.0;
    return nn::evaluate(w, arch, data.val.samples, data.val.labels).accuracy;
  };
}

double SampleBatch::candidate_mean() const {
  require(!candidates.empty(), ErrorKind::kInvalidArgument, "sample batch: no candidates");
  double s = 0.0;
  for (const auto& c : candidates) s += c.metric;
  return s / static_cast<double>(candidates.size());
}

double SampleBatch::selected_mean() const {
  require(!selected.empty(), ErrorKind::kInvalidArgument, "sample batch: nothing selected");
  double s = 0.0;
  for (std::size_t i : selected) s += candidates[i].metric;
  return s / static_cast<double>(selected.size());
}

std::vector<nn::ModelWeights> SampleBatch::selected_weights() const {
  std::vector<nn::ModelWeights> out;
  for (std::size_t i : selected) out.push_back(candidates[i].weights);
  return out;
}

std::vector<nn::ModelWeights> decode_samples(const hyperrep::HyperRep& hr,
                                             const std::vector<Matrix>& latents) {
  return hyperrep::decode_models(hr, latents);
}

SampleBatch score_and_select(const hyperrep::HyperRep& hr, std::vector<Matrix> latents,
                             std::size_t m, const MetricFn& metric, std::size_t parallelism) {
  require(m <= latents.size(), ErrorKind::kInvalidArgument, "subsample: m must not exceed k");
  auto weights = decode_samples(hr, latents);
  SampleBatch b;
  b.candidates.resize(latents.size());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    b.candidates[i].index = i;
    b.candidates[i].latent = std::move(latents[i]);
    b.candidates[i].weights = std::move(weights[i]);
  }
  parallel_for(b.candidates.size(), parallelism,
               [&](std::size_t i) { b.candidates[i].metric = metric(b.candidates[i].weights); });
  std::vector<std::size_t> order(b.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return b.candidates[x].metric > b.candidates[y].metric;
  });
  b.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  return b;
}

SampleBatch subsample(const hyperrep::HyperRep& hr, const TokenKDE& kde, std::size_t k,
                      std::size_t m, const MetricFn& metric, std::uint64_t seed,
                      std::size_t parallelism) {
  return score_and_select(hr, sample_latents(kde, k, seed), m, metric, parallelism);
}

std::vector<double> BootstrapResult::best_means() const {
  std::vector<double> out;
  for (const auto& it : iterations) out.push_back(it.batch.selected_mean());
  return out;
}

namespace {

constexpr char kConditioning[] = "skipped: base models have no normalization layers";

double MeanBandwidth(const TokenKDE& kde) {
  const auto& v = kde.bandwidth.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

BootstrapResult Continue(const hyperrep::HyperRep& hr, BootstrapResult r, AnchorMode mode,
                         std::size_t iterations,
                         std::size_t k, std::size_t m, const MetricFn& metric, std::uint64_t seed,
                         std::size_t parallelism) {
  for (std::size_t it = 2; it <= iterations; ++it) {
    const SampleBatch& prev = r.iterations.back().batch;
    // The new prompts are the embeddings of the best decoded models, which
    // pulls them back onto the encoder's manifold.
    const std::vector<Matrix> anchors = hyperrep::embed_models(hr, prev.selected_weights());
    const TokenKDE kde = fit_kde(anchors, mode);
    BootstrapIteration step;
    step.iteration = it;
    step.source = "kde";
    step.anchors = anchors;
    step.mean_bandwidth = MeanBandwidth(kde);
    step.conditioning = kConditioning;
    step.batch = subsample(hr, kde, k, m, metric, derive_seed(seed, "bootstrap", it), parallelism);
    r.iterations.push_back(std::move(step));
  }
  return r;
}

void RequireBootstrap(std::size_t iterations, std::size_t k, std::size_t m) {
  require(iterations >= 1 && m >= 1 && m <= k, ErrorKind::kInvalidArgument,
          "bootstrap: need iterations >= 1 and 1 <= m <= k");
}

}  // namespace

BootstrapResult bootstrap(const hyperrep::HyperRep& hr, const TokenKDE& start,
                          std::size_t iterations, std::size_t k, std::size_t m,
                          const MetricFn& metric, std::uint64_t seed, AnchorMode refit,
                          std::size_t parallelism) {
  RequireBootstrap(iterations, k, m);
  BootstrapResult r;
  BootstrapIteration first;
  first.iteration = 1;
  first.source = "kde";
  first.anchors = start.anchors;
  first.mean_bandwidth = MeanBandwidth(start);
  first.conditioning = kConditioning;
  first.batch = subsample(hr, start, k, m, metric, derive_seed(seed, "bootstrap", 1), parallelism);
  r.iterations.push_back(std::move(first));
  return Continue(hr, std::move(r), refit, iterations, k, m, metric, seed, parallelism);
}

BootstrapResult bootstrap(const hyperrep::HyperRep& hr, const GaussianPrior& start,
                          std::size_t iterations, std::size_t k, std::size_t m,
                          const MetricFn& metric, std::uint64_t seed, AnchorMode refit,
                          std::size_t parallelism) {
  RequireBootstrap(iterations, k, m);
  BootstrapResult r;
  BootstrapIteration first;
  first.iteration = 1;
  first.source = "gaussian";
  first.anchors = {start.mean};
  const auto& sd = start.std.values();
  first.mean_bandwidth = std::accumulate(sd.begin(), sd.end(), 0.0) / static_cast<double>(sd.size());
  first.conditioning = kConditioning;
  first.batch = score_and_select(
      hr, sample_latents(start, k, derive_seed(seed, "bootstrap", 1)), m, metric, parallelism);
  r.iterations.push_back(std::move(first));
  return Continue(hr, std::move(r), refit, iterations, k, m, metric, seed, parallelism);
}

std::vector<std::size_t> kde30_anchors(const zoo::Zoo& zoo, double fraction,
                                       const std::vector<zoo::Split>& splits) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorKind::kInvalidArgument,
          "kde30_anchors: fraction must be in (0, 1]");
  std::vector<std::pair<double, std::size_t>> pool;
  for (const auto& t : zoo.models) {
    if (std::find(splits.begin(), splits.end(), t.split) == splits.end()) continue;
    if (const auto* c = t.final_viable()) pool.emplace_back(c->metrics.val_acc, t.model_id);
  }
  require(!pool.empty(), ErrorKind::kInvalidArgument, "kde30_anchors: no viable models");
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool.size()) - 1e-9));
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(pool[i].second);
  return ids;
}

std::vector<double> FinetuneTable::mean() const {
  std::vector<double> out(epochs.size(), 0.0);
  for (const auto& row : accuracy) {
    for (std::size_t e = 0; e < row.size(); ++e) out[e] += row[e] / static_cast<double>(accuracy.size());
  }
  return out;
}

std::vector<std::size_t> report_epochs(std::size_t epochs) {
  std::vector<std::size_t> out{0};
  for (std::size_t e : {1, 5, 25}) {
    if (e <= epochs) out.push_back(e);
  }
  for (std::size_t e = 50; e <= epochs; e += 25) out.push_back(e);
  if (out.back() != epochs) out.push_back(epochs);
  return out;
}

FinetuneTable finetune_eval(const std::vector<nn::ModelWeights>& models,
                            const nn::Architecture& arch, const data::DatasetSplits& data,
                            const FinetuneOptions& options) {
  options.optimizer.validate();
  FinetuneTable table;
  table.epochs = report_epochs(options.epochs);
  table.accuracy.assign(models.size(), {});
  parallel_for(models.size(), options.parallelism, [&](std::size_t i) {
    nn::ModelWeights w = models[i];
    nn::OptimizerState state;
    Rng rng(derive_seed(options.seed, "finetune", i));
    std::vector<double>& row = table.accuracy[i];
    auto measure = [&] {
      row.push_back(w.all_finite()
                        ? nn::evaluate(w, arch, data.test.samples, data.test.labels).accuracy
                        : 0.0);
    };
    std::size_t next = 0;
    for (std::size_t e = 0; e <= options.epochs; ++e) {
      if (e > 0 && w.all_finite()) {
        nn::train_batches(w, arch, data.train.samples, data.train.labels,
                          nn::epoch_batches(data.train.size(), options.batch_size, rng),
                          options.optimizer, state);
      }
      if (next < table.epochs.size() && table.epochs[next] == e) {
        measure();
        ++next;
      }
    }
  });
  return table;
}

std::vector<nn::ModelWeights> weight_space_kde_sample(const std::vector<nn::ModelWeights>& models,
                                                      std::size_t k, std::uint64_t seed) {
  require(!models.empty(), ErrorKind::kInvalidArgument, "weight_space_kde_sample: no models");
  std::vector<Matrix> flat;
  for (const auto& w : models) {
    require(w.shapes() == models.front().shapes(), ErrorKind::kShapeMismatch,
            "weight_space_kde_sample: mixed architectures");
    flat.emplace_back(w.size(), 1, w.flatten());
  }
  nn::Architecture arch;
  arch.layers = models.front().shapes();
  std::vector<nn::ModelWeights> out;
  for (const auto& s : sample_latents(fit_kde(flat), k, derive_seed(seed, "weight-space"))) {
    out.push_back(nn::ModelWeights::unflatten(s.values(), arch));
  }
  return out;
}

zoo::Zoo sample_zoo(const SampleBatch& batch, const nn::Architecture& arch,
                    const data::DatasetSplits& data, const std::string& strategy,
                    const nlohmann::json& extra, bool selected_only) {
  zoo::Zoo z;
  z.factors.widths = arch.widths();
  z.factors.epochs = 0;
  z.factors.grid.activations = {arch.activation};
  std::vector<std::size_t> order = batch.selected;
  if (!selected_only) {
    order.resize(batch.candidates.size());
    std::iota(order.begin(), order.end(), 0);
  }
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Candidate& c = batch.candidates[order[rank]];
    zoo::Trajectory t;
    t.model_id = rank;
    t.config.activation = arch.activation;
    t.split = zoo::Split::kTest;
    zoo::Checkpoint cp;
    cp.weights = c.weights;
    cp.viable = c.weights.all_finite();
    if (cp.viable) {
      const auto tr = nn::evaluate(c.weights, arch, data.train.samples, data.train.labels);
      const auto va = nn::evaluate(c.weights, arch, data.val.samples, data.val.labels);
      const auto te = nn::evaluate(c.weights, arch, data.test.samples, data.test.labels);
      cp.metrics = {tr.loss, tr.accuracy, va.loss, va.accuracy, te.loss, te.accuracy};
    }
    t.checkpoints.push_back(std::move(cp));
    t.provenance = extra;
    t.provenance["strategy"] = strategy;
    t.provenance["sample_index"] = c.index;
    t.provenance["zero_shot_metric"] = c.metric;
    z.models.push_back(std::move(t));
  }
  return z;
}

}  // namespace hz::sampler
