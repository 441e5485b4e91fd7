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

#include "hz/analysis/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/symmetry/symmetry.hpp"
#include "hz/zoo/diversity.hpp"

namespace hz::analysis {
namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double sim_l2(const nn::ModelWeights& a, const nn::ModelWeights& b) {
  return std::exp(-symmetry::squared_distance(a, b));
}

double sim_cos(const nn::ModelWeights& a, const nn::ModelWeights& b) {
  require(a.shapes() == b.shapes(), ErrorKind::kShapeMismatch, "sim_cos: architecture mismatch");
  const double na = std::sqrt(Dot(a.flat(), a.flat()));
  const double nb = std::sqrt(Dot(b.flat(), b.flat()));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return Dot(a.flat(), b.flat()) / (na * nb);
}

double sim_pair(const nn::ModelWeights& a, const nn::ModelWeights& b, SimKind kind) {
  return kind == SimKind::kL2 ? sim_l2(a, b) : sim_cos(a, b);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::kInvalidArgument,
          "pearson: need two equally sized samples of length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0 && syy > 0.0, ErrorKind::kDegenerate, "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationResult weight_behavior_correlation(std::span<const nn::ModelWeights> models,
                                              const nn::Architecture& arch, const Matrix& probe,
                                              const CorrelationOptions& options) {
  require(options.cka_layer + 1 < arch.num_layers(), ErrorKind::kInvalidArgument,
          "weight_behavior_correlation: CKA layer must be hidden");
  std::vector<nn::ModelWeights> variants;
  std::vector<std::size_t> source;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const std::size_t copies = std::max<std::size_t>(options.permutations_per_model, 1);
    for (std::size_t k = 0; k < copies; ++k) {
      nn::ModelWeights v = models[m];
      if (options.permutations_per_model > 0) {
        v = symmetry::apply_permutation(
            v, symmetry::random_permutation_set(arch, derive_seed(options.seed, "corr-perm", m * 1000 + k)));
      }
      if (options.noise > 0.0) {
        v = symmetry::add_noise(v, options.noise, derive_seed(options.seed, "corr-noise", m * 1000 + k));
      }
      variants.push_back(std::move(v));
      source.push_back(m);
    }
  }
  double scale2 = 1.0;
  if (options.normalize_scale) {
    double mean_sq = 0.0;
    for (const auto& m : models) {
      for (double v : m.flat()) mean_sq += v * v;
    }
    mean_sq /= static_cast<double>(models.size());
    if (mean_sq > 0.0) scale2 = 1.0 / mean_sq;
  }
  std::vector<Matrix> acts;
  for (const auto& v : variants) acts.push_back(nn::hidden_activations(v, arch, probe, options.cka_layer));
  std::vector<double> cka, sim;
  for (std::size_t a = 0; a < variants.size(); ++a) {
    for (std::size_t b = a + 1; b < variants.size(); ++b) {
      if (source[a] == source[b]) continue;
      cka.push_back(zoo::linear_cka(acts[a], acts[b]));
      sim.push_back(options.kind == SimKind::kL2 ? scale2 * symmetry::squared_distance(variants[a], variants[b])
                                                 : sim_cos(variants[a], variants[b]));
    }
  }
  require(sim.size() >= 2, ErrorKind::kDegenerate, "weight_behavior_correlation: need 3+ variants");
  if (options.kind == SimKind::kL2) {
    // exp(-d^2) scaled by exp(min d^2): same Pearson correlation, no underflow.
    const double dmin = *std::min_element(sim.begin(), sim.end());
    for (double& s : sim) s = std::exp(-(s - dmin));
  }
  return {pearson(cka, sim), cka.size()};
}

nn::ModelWeights soup_average(std::span<const nn::ModelWeights> models, bool align_first,
                              const nn::ModelWeights* reference) {
  require(!models.empty(), ErrorKind::kInvalidArgument, "soup_average: no models");
  const nn::ModelWeights& ref = reference ? *reference : models.front();
  nn::ModelWeights soup = models.front();
  std::fill(soup.flat().begin(), soup.flat().end(), 0.0);
  for (const auto& m : models) {
    require(m.shapes() == soup.shapes(), ErrorKind::kShapeMismatch,
            "soup_average: architecture mismatch");
    const nn::ModelWeights aligned = align_first ? symmetry::align(m, ref).aligned : m;
    for (std::size_t i = 0; i < soup.size(); ++i) soup.flat()[i] += aligned.flat()[i];
  }
  const double inv = 1.0 / static_cast<double>(models.size());
  for (double& v : soup.flat()) v *= inv;
  return soup;
}

}  // namespace hz::analysis
