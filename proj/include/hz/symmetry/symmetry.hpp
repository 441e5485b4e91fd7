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
#include <span>

#include "hz/core/bigint.hpp"
#include "hz/core/matrix.hpp"
#include "hz/nn/architecture.hpp"
#include "hz/nn/optimizer.hpp"
#include "hz/nn/weights.hpp"
#include "hz/symmetry/permutation_set.hpp"

namespace hz::zoo {
struct Zoo;
}

namespace hz::symmetry {

// Convention: after permutation, row i of hidden layer l is original row
// layers[l][i].

PermutationSet identity_permutation_set(const nn::Architecture& arch);
PermutationSet random_permutation_set(const nn::Architecture& arch, std::uint64_t seed);

// Throws Error(kShapeMismatch) if p does not fit the hidden widths of `shapes`
// or any entry is not a bijection.
void validate_permutation_set(const PermutationSet& p, const std::vector<nn::LayerShape>& shapes);

nn::ModelWeights apply_permutation(const nn::ModelWeights& w, const PermutationSet& p);

PermutationSet inverse(const PermutationSet& p);
// Permutation equivalent to applying `first`, then `second`.
PermutationSet compose(const PermutationSet& second, const PermutationSet& first);

BigUnsigned count_equivalent(const nn::Architecture& arch);

double max_forward_deviation(const nn::ModelWeights& a, const nn::ModelWeights& b,
                             const nn::Architecture& arch, const Matrix& inputs);

bool verify_forward_equivalence(const nn::ModelWeights& w, const nn::Architecture& arch,
                                const PermutationSet& p, const Matrix& inputs, double tol);

struct BackwardCheck {
  std::size_t steps = 10;
  double tol = 1e-6;
  std::size_t batch_size = 16;
  nn::OptimizerConfig optimizer{nn::OptimizerKind::kSgd, 0.1};
  std::uint64_t batch_seed = 0;
  // Batch order for the permuted copy; equal to batch_seed unless testing a
  // mismatch.
  std::uint64_t permuted_batch_seed = 0;
};

struct BackwardReport {
  bool equivalent = true;
  double max_deviation = 0.0;
};

// Trains w and apply_permutation(w, p) side by side for `steps` minibatch
// steps and compares apply_permutation(w_t, p) to the permuted trajectory.
BackwardReport backward_equivalence(const nn::ModelWeights& w, const nn::Architecture& arch,
                                    const PermutationSet& p, const Matrix& x,
                                    std::span<const int> labels, const BackwardCheck& check);

bool verify_backward_equivalence(const nn::ModelWeights& w, const nn::Architecture& arch,
                                 const PermutationSet& p, const Matrix& x,
                                 std::span<const int> labels, const BackwardCheck& check);

// W + r * N(0, 1), elementwise.
nn::ModelWeights add_noise(const nn::ModelWeights& w, double r, std::uint64_t seed);

struct Alignment {
  nn::ModelWeights aligned;
  PermutationSet permutation;
  std::size_t sweeps = 0;
};

// Squared l2 distance of flattened parameters.
double squared_distance(const nn::ModelWeights& a, const nn::ModelWeights& b);

// Permutes w to minimize its flattened l2 distance to `reference`: coordinate
// descent over hidden layers (first to last), each an exact assignment
// problem, until no permutation changes or `max_sweeps` is reached. Descent
// runs from the identity and from a greedy incoming-weight matching; the
// closer result wins.
Alignment align(const nn::ModelWeights& w, const nn::ModelWeights& reference,
                std::size_t max_sweeps = 50);

// Exhaustive search over every permutation set. Only for tiny widths.
Alignment align_exhaustive(const nn::ModelWeights& w, const nn::ModelWeights& reference);

// Aligns every trajectory to the final viable checkpoint of `reference_id`
// with one permutation per trajectory derived from its own final viable
// checkpoint. Trajectories without a viable checkpoint are left untouched.
zoo::Zoo canonicalize_zoo(const zoo::Zoo& zoo, std::size_t reference_id,
                          std::size_t parallelism = 1);

}  // namespace hz::symmetry
