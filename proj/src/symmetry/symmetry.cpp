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

#include "hz/symmetry/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "hz/core/error.hpp"
#include "hz/core/parallel.hpp"
#include "hz/core/rng.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/nn/train.hpp"
#include "hz/symmetry/hungarian.hpp"
#include "hz/zoo/zoo.hpp"

namespace hz::symmetry {
namespace {

using nn::ModelWeights;

std::vector<std::size_t> Iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::size_t HiddenLayers(const std::vector<nn::LayerShape>& shapes) {
  return shapes.empty() ? 0 : shapes.size() - 1;
}

// Batches for `steps` optimizer steps, drawing fresh epochs as needed.
std::vector<std::vector<std::size_t>> StepBatches(std::size_t n, std::size_t batch_size,
                                                  std::size_t steps, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "equivalence-batches"));
  std::vector<std::vector<std::size_t>> out;
  while (out.size() < steps) {
    for (auto& b : nn::epoch_batches(n, batch_size, rng)) {
      if (out.size() == steps) break;
      out.push_back(std::move(b));
    }
  }
  return out;
}

double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (!(d <= m)) m = d;  // propagates NaN as a failure
  }
  return m;
}

// Score of placing original unit j of hidden layer l at position i, given the
// current permutations of the neighbouring layers.
Matrix LayerScore(const ModelWeights& w, const ModelWeights& ref, const PermutationSet& p,
                  std::size_t l, bool include_outgoing = true) {
  const auto& in = w.shape(l);
  const std::size_t n = in.out_dim;
  const bool has_prev = l > 0;
  const bool next_hidden = l + 1 < HiddenLayers(w.shapes());
  const auto& next = w.shape(l + 1);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = ref.b(l, i) * w.b(l, j);
      for (std::size_t c = 0; c < in.in_dim; ++c) {
        acc += ref.w(l, i, c) * w.w(l, j, has_prev ? p.layers[l - 1][c] : c);
      }
      for (std::size_t r = 0; include_outgoing && r < next.out_dim; ++r) {
        acc += ref.w(l + 1, r, i) * w.w(l + 1, next_hidden ? p.layers[l + 1][r] : r, j);
      }
      s(i, j) = acc;
    }
  }
  return s;
}

double AssignmentValue(const Matrix& s, const std::vector<std::size_t>& perm) {
  double v = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) v += s(i, perm[i]);
  return v;
}

}  // namespace

PermutationSet identity_permutation_set(const nn::Architecture& arch) {
  arch.validate();
  PermutationSet p;
  for (std::size_t l = 0; l + 1 < arch.num_layers(); ++l) p.layers.push_back(Iota(arch.layers[l].out_dim));
  return p;
}

PermutationSet random_permutation_set(const nn::Architecture& arch, std::uint64_t seed) {
  PermutationSet p = identity_permutation_set(arch);
  Rng rng(derive_seed(seed, "permutation"));
  for (auto& perm : p.layers) {
    // Fisher-Yates
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    }
  }
  return p;
}

void validate_permutation_set(const PermutationSet& p, const std::vector<nn::LayerShape>& shapes) {
  require(p.layers.size() == HiddenLayers(shapes), ErrorKind::kShapeMismatch,
          "permutation set: wrong number of hidden layers");
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& perm = p.layers[l];
    require(perm.size() == shapes[l].out_dim, ErrorKind::kShapeMismatch,
            "permutation set: width mismatch at hidden layer " + std::to_string(l));
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t v : perm) {
      require(v < perm.size() && !seen[v], ErrorKind::kShapeMismatch,
              "permutation set: not a bijection at hidden layer " + std::to_string(l));
      seen[v] = true;
    }
  }
}

ModelWeights apply_permutation(const ModelWeights& w, const PermutationSet& p) {
  validate_permutation_set(p, w.shapes());
  ModelWeights out = w;
  for (std::size_t l = 0; l < w.num_layers(); ++l) {
    const auto& s = w.shape(l);
    const std::vector<std::size_t>* rows = l < p.layers.size() ? &p.layers[l] : nullptr;
    const std::vector<std::size_t>* cols = l > 0 ? &p.layers[l - 1] : nullptr;
    for (std::size_t r = 0; r < s.out_dim; ++r) {
      const std::size_t src_r = rows ? (*rows)[r] : r;
      for (std::size_t c = 0; c < s.in_dim; ++c) {
        out.w(l, r, c) = w.w(l, src_r, cols ? (*cols)[c] : c);
      }
      out.b(l, r) = w.b(l, src_r);
    }
  }
  return out;
}

PermutationSet inverse(const PermutationSet& p) {
  PermutationSet inv = p;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (std::size_t i = 0; i < p.layers[l].size(); ++i) inv.layers[l][p.layers[l][i]] = i;
  }
  return inv;
}

PermutationSet compose(const PermutationSet& second, const PermutationSet& first) {
  require(second.layers.size() == first.layers.size(), ErrorKind::kShapeMismatch,
          "compose: layer count mismatch");
  PermutationSet out = first;
  for (std::size_t l = 0; l < first.layers.size(); ++l) {
    require(second.layers[l].size() == first.layers[l].size(), ErrorKind::kShapeMismatch,
            "compose: width mismatch");
    for (std::size_t i = 0; i < first.layers[l].size(); ++i) {
      out.layers[l][i] = first.layers[l][second.layers[l][i]];
    }
  }
  return out;
}

BigUnsigned count_equivalent(const nn::Architecture& arch) {
  arch.validate();
  BigUnsigned count(1);
  for (std::size_t l = 0; l + 1 < arch.num_layers(); ++l) {
    for (std::size_t k = 2; k <= arch.layers[l].out_dim; ++k) count *= static_cast<std::uint32_t>(k);
  }
  return count;
}

double max_forward_deviation(const ModelWeights& a, const ModelWeights& b,
                             const nn::Architecture& arch, const Matrix& inputs) {
  const Matrix ya = nn::forward(a, arch, inputs);
  const Matrix yb = nn::forward(b, arch, inputs);
  return MaxAbsDiff(ya.values(), yb.values());
}

bool verify_forward_equivalence(const ModelWeights& w, const nn::Architecture& arch,
                                const PermutationSet& p, const Matrix& inputs, double tol) {
  const double dev = max_forward_deviation(w, apply_permutation(w, p), arch, inputs);
  return tol == 0.0 ? dev == 0.0 : dev < tol;
}

BackwardReport backward_equivalence(const ModelWeights& w, const nn::Architecture& arch,
                                    const PermutationSet& p, const Matrix& x,
                                    std::span<const int> labels, const BackwardCheck& check) {
  require(x.rows() == labels.size() && x.rows() > 0, ErrorKind::kShapeMismatch,
          "backward_equivalence: data and labels disagree");
  check.optimizer.validate();
  ModelWeights a = w;
  ModelWeights b = apply_permutation(w, p);
  nn::OptimizerState sa, sb;
  const auto batches_a = StepBatches(x.rows(), check.batch_size, check.steps, check.batch_seed);
  const auto batches_b =
      StepBatches(x.rows(), check.batch_size, check.steps, check.permuted_batch_seed);
  BackwardReport report;
  for (std::size_t t = 0; t < check.steps; ++t) {
    nn::train_batches(a, arch, x, labels, {batches_a[t]}, check.optimizer, sa);
    nn::train_batches(b, arch, x, labels, {batches_b[t]}, check.optimizer, sb);
    const double dev = MaxAbsDiff(apply_permutation(a, p).flat(), b.flat());
    report.max_deviation = std::max(report.max_deviation, dev);
    if (!(dev < check.tol)) {
      report.equivalent = false;
      report.max_deviation = dev;
      break;
    }
  }
  return report;
}

bool verify_backward_equivalence(const ModelWeights& w, const nn::Architecture& arch,
                                 const PermutationSet& p, const Matrix& x,
                                 std::span<const int> labels, const BackwardCheck& check) {
  return backward_equivalence(w, arch, p, x, labels, check).equivalent;
}

ModelWeights add_noise(const ModelWeights& w, double r, std::uint64_t seed) {
  require(r >= 0.0 && std::isfinite(r), ErrorKind::kInvalidArgument,
          "add_noise: ratio must be finite and >= 0");
  ModelWeights out = w;
  if (r == 0.0) return out;
  Rng rng(derive_seed(seed, "weight-noise"));
  for (double& v : out.flat()) v += r * standard_normal(rng);
  return out;
}

double squared_distance(const ModelWeights& a, const ModelWeights& b) {
  require(a.shapes() == b.shapes(), ErrorKind::kShapeMismatch,
          "squared_distance: architecture mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.flat()[i] - b.flat()[i];
    s += d * d;
  }
  return s;
}

// Coordinate descent from `start`; returns the number of sweeps.
std::size_t Descend(const ModelWeights& w, const ModelWeights& reference, PermutationSet& p,
                    std::size_t max_sweeps) {
  std::size_t sweeps = 0;
  bool changed = true;
  while (changed && sweeps < max_sweeps) {
    changed = false;
    ++sweeps;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      const Matrix s = LayerScore(w, reference, p, l);
      auto& current = p.layers[l];
      const auto candidate = solve_assignment_max(s);
      // Keep the current permutation unless the candidate is strictly better,
      // so ties resolve toward the earlier choice and sweeps terminate.
      const double gain = AssignmentValue(s, candidate) - AssignmentValue(s, current);
      double scale = 0.0;
      for (double v : s.values()) scale = std::max(scale, std::abs(v));
      if (gain > 1e-12 * std::max(1.0, scale * static_cast<double>(current.size()))) {
        current = candidate;
        changed = true;
      }
    }
  }
  return sweeps;
}

Alignment align(const ModelWeights& w, const ModelWeights& reference, std::size_t max_sweeps) {
  require(w.shapes() == reference.shapes() && w.num_layers() >= 2, ErrorKind::kShapeMismatch,
          "align: architecture mismatch");
  PermutationSet from_identity;
  for (std::size_t l = 0; l < HiddenLayers(w.shapes()); ++l) {
    from_identity.layers.push_back(Iota(w.shape(l).out_dim));
  }
  // Second start: match layers first to last on incoming weights and biases
  // only, then refine. Exact for permuted copies with distinct units.
  PermutationSet greedy = from_identity;
  for (std::size_t l = 0; l < greedy.layers.size(); ++l) {
    greedy.layers[l] = solve_assignment_max(LayerScore(w, reference, greedy, l, false));
  }
  Alignment result;
  result.sweeps = Descend(w, reference, from_identity, max_sweeps);
  result.permutation = from_identity;
  result.aligned = apply_permutation(w, from_identity);
  if (greedy != from_identity) {
    const std::size_t sweeps = Descend(w, reference, greedy, max_sweeps);
    ModelWeights cand = apply_permutation(w, greedy);
    if (squared_distance(cand, reference) < squared_distance(result.aligned, reference)) {
      result.aligned = std::move(cand);
      result.permutation = std::move(greedy);
      result.sweeps = sweeps;
    }
  }
  return result;
}

Alignment align_exhaustive(const ModelWeights& w, const ModelWeights& reference) {
  require(w.shapes() == reference.shapes() && w.num_layers() >= 2, ErrorKind::kShapeMismatch,
          "align_exhaustive: architecture mismatch");
  PermutationSet p;
  for (std::size_t l = 0; l < HiddenLayers(w.shapes()); ++l) p.layers.push_back(Iota(w.shape(l).out_dim));
  Alignment best;
  double best_d = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t)> visit = [&](std::size_t l) {
    if (l == p.layers.size()) {
      ModelWeights cand = apply_permutation(w, p);
      const double d = squared_distance(cand, reference);
      if (d < best_d) {
        best_d = d;
        best.aligned = std::move(cand);
        best.permutation = p;
      }
      return;
    }
    std::sort(p.layers[l].begin(), p.layers[l].end());
    do {
      visit(l + 1);
    } while (std::next_permutation(p.layers[l].begin(), p.layers[l].end()));
  };
  visit(0);
  return best;
}

zoo::Zoo canonicalize_zoo(const zoo::Zoo& z, std::size_t reference_id, std::size_t parallelism) {
  const zoo::Trajectory* ref_t = z.find(reference_id);
  require(ref_t != nullptr, ErrorKind::kInvalidArgument,
          "canonicalize_zoo: unknown reference model " + std::to_string(reference_id));
  const zoo::Checkpoint* ref_c = ref_t->final_viable();
  require(ref_c != nullptr, ErrorKind::kDegenerate,
          "canonicalize_zoo: reference model has no viable checkpoint");
  zoo::Zoo out = z;
  parallel_for(out.models.size(), parallelism, [&](std::size_t m) {
    zoo::Trajectory& t = out.models[m];
    const zoo::Checkpoint* last = t.final_viable();
    if (last == nullptr || last->weights.shapes() != ref_c->weights.shapes()) return;
    PermutationSet p = t.model_id == reference_id
                           ? identity_permutation_set(z.architecture_of(t))
                           : align(last->weights, ref_c->weights).permutation;
    for (auto& c : t.checkpoints) c.weights = apply_permutation(c.weights, p);
    t.alignment = t.alignment ? compose(p, *t.alignment) : p;
  });
  return out;
}

}  // namespace hz::symmetry
