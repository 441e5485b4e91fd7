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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"
#include "hz/data/tetris.hpp"
#include "hz/nn/init.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/symmetry/hungarian.hpp"
#include "hz/symmetry/symmetry.hpp"
#include "hz/zoo/zoo.hpp"

using namespace hz;
using namespace hz::symmetry;
using nn::Activation;
using nn::Architecture;
using nn::InitMethod;
using nn::ModelWeights;

namespace {

ModelWeights RandomNet(const Architecture& arch, std::uint64_t seed) {
  // Non-zero biases so bias handling is exercised.
  ModelWeights w = nn::init_weights(arch, InitMethod::kNormal, seed);
  Rng rng(seed ^ 0xabcdef);
  for (std::size_t l = 0; l < w.num_layers(); ++l)
    for (double& b : w.bias(l)) b = standard_normal(rng);
  return w;
}

Matrix RandomInputs(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, d);
  for (double& v : x.values()) v = standard_normal(rng);
  return x;
}

std::size_t Factorial(std::size_t n) { return n <= 1 ? 1 : n * Factorial(n - 1); }

// Brute-force minimum-cost assignment.
double BruteAssignment(const Matrix& c) {
  std::vector<std::size_t> p(c.rows());
  std::iota(p.begin(), p.end(), 0);
  double best = 1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += c(i, p[i]);
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace

TEST_CASE("random_permutation_set: bijections, determinism, forced identity") {
  const auto arch = Architecture::from_widths({6, 5, 1, 4, 3}, Activation::kTanh);
  const auto p = random_permutation_set(arch, 4);
  REQUIRE(p.layers.size() == 3);
  CHECK_NOTHROW(validate_permutation_set(p, arch.layers));
  CHECK(p.layers[1] == std::vector<std::size_t>{0});
  CHECK(p == random_permutation_set(arch, 4));
  CHECK_FALSE(p == random_permutation_set(arch, 5));
}

TEST_CASE("random_permutation_set: uniform over the 6 permutations of width 3") {
  const auto arch = Architecture::from_widths({2, 3, 2}, Activation::kTanh);
  std::map<std::vector<std::size_t>, int> freq;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) ++freq[random_permutation_set(arch, s).layers[0]];
  CHECK(freq.size() == 6);
  for (const auto& [perm, n] : freq) CHECK(std::abs(n / double(draws) - 1.0 / 6.0) < 0.02);
}

TEST_CASE("apply_permutation: identity, inverse, composition") {
  const auto arch = Architecture::from_widths({7, 5, 4, 3}, Activation::kTanh);
  const auto w = RandomNet(arch, 1);
  CHECK(apply_permutation(w, identity_permutation_set(arch)) == w);
  const auto p = random_permutation_set(arch, 2);
  const auto q = random_permutation_set(arch, 3);
  CHECK(apply_permutation(apply_permutation(w, p), inverse(p)) == w);
  CHECK(apply_permutation(apply_permutation(w, p), q) == apply_permutation(w, compose(q, p)));
  CHECK(compose(inverse(p), p) == identity_permutation_set(arch));
}

TEST_CASE("apply_permutation: explicit matrix form on a hand example") {
  // 2 -> 3 -> 1; permutation [2, 0, 1]
  const auto arch = Architecture::from_widths({2, 3, 1}, Activation::kRelu);
  ModelWeights w(arch);
  std::iota(w.flat().begin(), w.flat().end(), 1.0);
  // flat: W0 = [[1,2],[3,4],[5,6]], b0 = [7,8,9], W1 = [[10,11,12]], b1 = [13]
  const auto out = apply_permutation(w, PermutationSet{{{2, 0, 1}}});
  const std::vector<double> expect{5, 6, 1, 2, 3, 4, 9, 7, 8, 12, 10, 11, 13};
  CHECK(std::vector<double>(out.flat().begin(), out.flat().end()) == expect);
}

TEST_CASE("apply_permutation rejects bad sets") {
  const auto arch = nn::tetris_architecture(Activation::kTanh);
  const ModelWeights w(arch);
  CHECK_THROWS_AS(apply_permutation(w, PermutationSet{{{0, 1, 2}}}), Error);
  CHECK_THROWS_AS(apply_permutation(w, PermutationSet{{{0, 1, 2, 3, 3}}}), Error);
  CHECK_THROWS_AS(apply_permutation(w, PermutationSet{}), Error);
}

TEST_CASE("count_equivalent") {
  CHECK(count_equivalent(nn::tetris_architecture(Activation::kTanh)).to_string() == "120");
  CHECK(count_equivalent(Architecture::from_widths({16, 3, 3, 4}, Activation::kTanh)).to_string() == "36");
  CHECK(count_equivalent(Architecture::from_widths({16, 1, 1, 4}, Activation::kTanh)).to_string() == "1");
  // 25! = 15511210043330985984000000 exceeds 64 bits
  CHECK(count_equivalent(Architecture::from_widths({3, 25, 2}, Activation::kTanh)).to_string() ==
        "15511210043330985984000000");
}

TEST_CASE("forward equivalence holds for every activation; corruption is detected") {
  for (Activation act : {Activation::kTanh, Activation::kRelu, Activation::kSigmoid, Activation::kGelu}) {
    const auto arch = Architecture::from_widths({16, 5, 6, 4}, act);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto w = RandomNet(arch, s);
      const auto p = random_permutation_set(arch, 100 + s);
      const Matrix x = RandomInputs(100, 16, s);
      CHECK(verify_forward_equivalence(w, arch, p, x, 1e-9));
    }
  }
  const auto arch = nn::tetris_architecture(Activation::kTanh);
  const auto w = RandomNet(arch, 9);
  const Matrix x = RandomInputs(100, 16, 9);
  CHECK(verify_forward_equivalence(w, arch, identity_permutation_set(arch), x, 0.0));
  // Permute the rows of layer 0 only, leaving the columns of layer 1 alone.
  ModelWeights corrupt = w;
  const std::vector<std::size_t> perm{1, 2, 3, 4, 0};
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 16; ++c) corrupt.w(0, r, c) = w.w(0, perm[r], c);
    corrupt.b(0, r) = w.b(0, perm[r]);
  }
  CHECK(max_forward_deviation(w, corrupt, arch, x) > 1e-3);
}

TEST_CASE("backward equivalence: dual trajectories coincide; mismatched batches do not") {
  const auto data = data::gen_tetris(20, 0.05, 1);
  const auto arch = nn::tetris_architecture(Activation::kTanh);
  const auto w = nn::init_weights(arch, InitMethod::kKaimingUniform, 3);
  const auto p = random_permutation_set(arch, 3);
  BackwardCheck check;
  check.steps = 0;
  CHECK(verify_backward_equivalence(w, arch, p, data.samples, data.labels, check));
  check.steps = 10;
  CHECK(verify_backward_equivalence(w, arch, p, data.samples, data.labels, check));
  check.optimizer = {nn::OptimizerKind::kAdam, 1e-2};
  CHECK(verify_backward_equivalence(w, arch, p, data.samples, data.labels, check));
  check.permuted_batch_seed = 1;
  CHECK_FALSE(verify_backward_equivalence(w, arch, p, data.samples, data.labels, check));
}

TEST_CASE("add_noise") {
  const auto arch = Architecture::from_widths({50, 100, 10}, Activation::kTanh);
  const auto w = RandomNet(arch, 1);
  CHECK(add_noise(w, 0.0, 1) == w);
  CHECK(add_noise(w, 0.1, 1) == add_noise(w, 0.1, 1));
  CHECK_FALSE(add_noise(w, 0.1, 1) == add_noise(w, 0.1, 2));
  const auto n = add_noise(w, 0.1, 3);
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = n.flat()[i] - w.flat()[i];
    mean += d;
    sq += d * d;
  }
  mean /= double(w.size());
  const double sd = std::sqrt(sq / double(w.size()) - mean * mean);
  CHECK(std::abs(sd - 0.1) < 0.005);
  CHECK_THROWS_AS(add_noise(w, -1.0, 1), Error);
}

TEST_CASE("noise locality: accuracy drop grows with noise ratio") {
  auto f = zoo::seed_config(1, 15, 2);
  f.dataset.n_per_class = 40;
  const auto z = zoo::generate_zoo(f);
  const auto d = zoo::zoo_dataset(f.dataset);
  const auto arch = z.architecture_of(z.models[0]);
  const auto& w = z.models[0].checkpoints.back().weights;
  const double base = nn::evaluate(w, arch, d.test.samples, d.test.labels).accuracy;
  const std::vector<double> ratios{0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
  std::vector<double> drops;
  for (double r : ratios) {
    double drop = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s)
      drop += base - nn::evaluate(add_noise(w, r, s), arch, d.test.samples, d.test.labels).accuracy;
    drops.push_back(drop / 20.0);
  }
  // Spearman rank correlation between ratio and mean drop; ratios are sorted.
  std::vector<std::size_t> idx(drops.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return drops[a] < drops[b]; });
  std::vector<double> rank(drops.size());
  for (std::size_t i = 0; i < idx.size(); ++i) rank[idx[i]] = double(i);
  double d2 = 0.0;
  for (std::size_t i = 0; i < rank.size(); ++i) d2 += (rank[i] - double(i)) * (rank[i] - double(i));
  const double n = double(rank.size());
  CHECK(1.0 - 6.0 * d2 / (n * (n * n - 1.0)) > 0.8);
}

TEST_CASE("hungarian matches brute force") {
  Rng rng(5);
  for (std::size_t n = 1; n <= 7; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      Matrix c(n, n);
      for (double& v : c.values()) v = standard_normal(rng);
      if (trial % 5 == 0)
        for (double& v : c.values()) v = std::round(v);  // ties
      const auto a = solve_assignment(c);
      std::vector<std::size_t> sorted = a;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < n; ++i) CHECK(sorted[i] == i);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c(i, a[i]);
      CHECK(s == doctest::Approx(BruteAssignment(c)).epsilon(1e-12));
    }
  }
  CHECK(solve_assignment(Matrix(0, 0)).empty());
  CHECK_THROWS_AS(solve_assignment(Matrix(2, 3)), Error);
}

TEST_CASE("align: recovers permuted copies and matches exhaustive search") {
  int exact = 0, recovered = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const std::size_t width = 2 + s % 5;  // 2..6
    const auto arch = Architecture::from_widths({5, width, 3}, Activation::kTanh);
    const auto w = RandomNet(arch, s);
    const auto ref = RandomNet(arch, 1000 + s);
    const auto a = align(w, ref);
    const auto e = align_exhaustive(w, ref);
    exact += std::abs(squared_distance(a.aligned, ref) - squared_distance(e.aligned, ref)) <= 1e-12;
    const auto p = random_permutation_set(arch, s);
    const auto back = align(apply_permutation(w, p), w);
    recovered += back.aligned == w && back.permutation == inverse(p);
  }
  CHECK(exact == 100);
  CHECK(recovered == 100);
}

TEST_CASE("align: deep nets, permuted copies recovered and distance never increases") {
  const auto arch = Architecture::from_widths({6, 4, 5, 3, 2}, Activation::kRelu);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto w = RandomNet(arch, s);
    const auto ref = RandomNet(arch, 500 + s);
    const auto a = align(w, ref);
    CHECK(squared_distance(a.aligned, ref) <= squared_distance(w, ref));
    CHECK(a.aligned == apply_permutation(w, a.permutation));
    CHECK(squared_distance(a.aligned, ref) >= squared_distance(align_exhaustive(w, ref).aligned, ref) - 1e-12);
    const auto p = random_permutation_set(arch, s);
    CHECK(align(apply_permutation(w, p), w).aligned == w);
  }
  const auto w = RandomNet(arch, 1);
  CHECK(align(w, w).permutation == identity_permutation_set(arch));
  CHECK_THROWS_AS(align(w, RandomNet(nn::tetris_architecture(Activation::kTanh), 1)), Error);
}

TEST_CASE("canonicalize_zoo") {
  auto f = zoo::seed_config(6, 3, 7);
  f.dataset.n_per_class = 20;
  const auto z = zoo::generate_zoo(f);
  const auto c = canonicalize_zoo(z, 2);
  const auto arch = z.architecture_of(z.models[0]);
  const Matrix x = RandomInputs(50, 16, 1);
  for (std::size_t m = 0; m < z.models.size(); ++m) {
    REQUIRE(c.models[m].alignment.has_value());
    const auto& p = *c.models[m].alignment;
    if (z.models[m].model_id == 2) {
      CHECK(p == identity_permutation_set(arch));
    }
    // one permutation re-derived from the final checkpoint covers all epochs
    CHECK(p == align(z.models[m].checkpoints.back().weights,
                     z.models[2].checkpoints.back().weights).permutation);
    for (std::size_t e = 0; e < z.models[m].checkpoints.size(); ++e) {
      const auto& orig = z.models[m].checkpoints[e].weights;
      CHECK(c.models[m].checkpoints[e].weights == apply_permutation(orig, p));
      CHECK(max_forward_deviation(orig, c.models[m].checkpoints[e].weights, arch, x) < 1e-9);
    }
  }
  CHECK(c.models[2].checkpoints.back().weights == z.models[2].checkpoints.back().weights);
  CHECK_THROWS_AS(canonicalize_zoo(z, 99), Error);
  CHECK(canonicalize_zoo(z, 2, 3).models[4].checkpoints[1].weights == c.models[4].checkpoints[1].weights);
}
