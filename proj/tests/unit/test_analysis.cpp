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
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "doctest.h"
#include "hz/analysis/probe.hpp"
#include "hz/analysis/similarity.hpp"
#include "hz/analysis/weight_features.hpp"
#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"
#include "hz/nn/init.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/symmetry/symmetry.hpp"
#include "hz/zoo/zoo.hpp"

using namespace hz;
using namespace hz::analysis;
using nn::Activation;
using nn::Architecture;
using nn::ModelWeights;

namespace {

ModelWeights RandomNet(const Architecture& arch, std::uint64_t seed) {
  ModelWeights w = nn::init_weights(arch, nn::InitMethod::kNormal, seed);
  Rng rng(seed + 77);
  for (std::size_t l = 0; l < w.num_layers(); ++l)
    for (double& b : w.bias(l)) b = standard_normal(rng);
  return w;
}

Matrix Gaussian(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.values()) v = standard_normal(rng);
  return m;
}

const zoo::Zoo& SmallZoo() {
  static const zoo::Zoo z = [] {
    auto f = zoo::seed_config(30, 10, 5);
    f.dataset.n_per_class = 40;
    return zoo::generate_zoo(f);
  }();
  return z;
}

}  // namespace

TEST_CASE("weight_stats: sort oracle, constants, permutation invariance") {
  const auto arch = nn::tetris_architecture(Activation::kTanh);
  const auto w = RandomNet(arch, 3);
  const auto st = weight_stats(w);
  REQUIRE(st.features().size() == 7 * arch.num_layers());
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    std::vector<double> v(w.layer(l).begin(), w.layer(l).end());
    std::sort(v.begin(), v.end());
    const auto& s = st.layers[l];
    CHECK(s.q0 == v.front());
    CHECK(s.q100 == v.back());
    // linear interpolation at position q * (n - 1)
    auto q = [&](double p) {
      const double pos = p * double(v.size() - 1);
      const auto i = std::size_t(pos);
      return i + 1 < v.size() ? v[i] + (pos - double(i)) * (v[i + 1] - v[i]) : v[i];
    };
    CHECK(s.q25 == doctest::Approx(q(0.25)).epsilon(1e-14));
    CHECK(s.q50 == doctest::Approx(q(0.5)).epsilon(1e-14));
    CHECK(s.q75 == doctest::Approx(q(0.75)).epsilon(1e-14));
    CHECK(s.q0 <= s.q25);
    CHECK(s.q25 <= s.q50);
    CHECK(s.q50 <= s.q75);
    CHECK(s.q75 <= s.q100);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
  }
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto p = symmetry::random_permutation_set(arch, s);
    CHECK(weight_stats(symmetry::apply_permutation(w, p)).features() == st.features());
  }
  ModelWeights c(arch);
  std::fill(c.flat().begin(), c.flat().end(), 0.25);
  for (const auto& s : weight_stats(c).layers) {
    CHECK(s.std == 0.0);
    CHECK(s.q0 == 0.25);
    CHECK(s.q50 == 0.25);
    CHECK(s.q100 == 0.25);
  }
}

TEST_CASE("matrix_entropy") {
  Matrix eye(6, 6);
  for (std::size_t i = 0; i < 6; ++i) eye(i, i) = 1.0;
  CHECK(matrix_entropy(eye) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix rank1(5, 7);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 7; ++c) rank1(r, c) = double(r + 1) * double(c % 3 + 1);
  CHECK(matrix_entropy(rank1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(matrix_entropy(Matrix(4, 4)) == 0.0);

  const Matrix g = Gaussian(5, 16, 1);
  const double s = matrix_entropy(g);
  CHECK(s > 0.0);
  CHECK(s < 1.0);
  Matrix rows = g;
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  for (std::size_t r = 0; r < 5; ++r)
    std::copy(g.row(perm[r]).begin(), g.row(perm[r]).end(), rows.row(r).begin());
  CHECK(std::abs(matrix_entropy(rows) - s) < 1e-12);
  CHECK(std::abs(matrix_entropy(g.transposed()) - s) < 1e-12);
  // orthogonal rotation from the left
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Random(5, 5));
  const Eigen::MatrixXd q = qr.householderQ();
  Matrix rotated(5, 16);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 16; ++c)
      for (std::size_t k = 0; k < 5; ++k) rotated(r, c) += q(Eigen::Index(r), Eigen::Index(k)) * g(k, c);
  CHECK(std::abs(matrix_entropy(rotated) - s) < 1e-10);

  // invariant under apply_permutation, layer by layer
  const auto arch = Architecture::from_widths({16, 5, 6, 4}, Activation::kTanh);
  const auto w = RandomNet(arch, 2);
  const auto pw = symmetry::apply_permutation(w, symmetry::random_permutation_set(arch, 2));
  for (std::size_t l = 0; l < 3; ++l)
    CHECK(std::abs(matrix_entropy(layer_matrix(w, l)) - matrix_entropy(layer_matrix(pw, l))) < 1e-12);
}

TEST_CASE("entropy_trajectory: length, near-uniform spectrum at init") {
  const auto& z = SmallZoo();
  const auto e = entropy_trajectory(z);
  CHECK(e.size() == z.factors.epochs + 1);
  CHECK(largest_layer(z.architecture_of(z.models[0])) == 0);
  // Sampling oracle: median entropy of fresh 5x16 uniform-init matrices.
  std::vector<double> fresh;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto w = nn::init_weights(z.architecture_of(z.models[0]), nn::InitMethod::kUniform, 1000 + s);
    fresh.push_back(matrix_entropy(layer_matrix(w, 0)));
  }
  CHECK(e[0] == doctest::Approx(median(fresh)).epsilon(0.03));
  CHECK(e[0] > 0.85);
  CHECK(entropy_trajectory(z, 1).size() == e.size());
}

TEST_CASE("similarities") {
  const auto arch = nn::tetris_architecture(Activation::kTanh);
  const auto w = RandomNet(arch, 1);
  ModelWeights w2 = w;
  for (double& v : w2.flat()) v *= 2.0;
  CHECK(sim_l2(w, w) == 1.0);
  CHECK(sim_pair(w, w2, SimKind::kCos) == doctest::Approx(1.0).epsilon(1e-14));
  // direct evaluation on a small pair
  const auto tiny = Architecture::from_widths({1, 1, 1}, Activation::kTanh);
  ModelWeights a(tiny), b(tiny);
  a.w(0, 0, 0) = 0.5;
  b.w(1, 0, 0) = 0.25;
  b.b(0, 0) = -0.5;
  CHECK(sim_l2(a, b) == doctest::Approx(std::exp(-(0.25 + 0.0625 + 0.25))).epsilon(1e-15));
  CHECK(sim_cos(a, b) == 0.0);
  const auto u = RandomNet(arch, 2);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    dot += w.flat()[i] * u.flat()[i];
    na += w.flat()[i] * w.flat()[i];
    nb += u.flat()[i] * u.flat()[i];
  }
  CHECK(sim_cos(w, u) == doctest::Approx(dot / std::sqrt(na * nb)).epsilon(1e-13));
}

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 6, 8, 10};
  const std::vector<double> z{5, 1, 4, 2, 3};
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  // deviations (-2,-1,0,1,2) and (2,-2,1,-1,0): -3 / sqrt(10 * 10)
  CHECK(pearson(x, z) == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK_THROWS_AS(pearson(x, std::vector<double>(5, 1.0)), Error);
}

TEST_CASE("weight_behavior_correlation: degenerate inputs, bounds, determinism") {
  const auto arch = nn::tetris_architecture(Activation::kTanh);
  const auto w = RandomNet(arch, 1);
  const Matrix probe = Gaussian(50, 16, 2);
  std::vector<ModelWeights> twins{w, w};
  CHECK_THROWS_AS(weight_behavior_correlation(twins, arch, probe, {}), Error);
  std::vector<ModelWeights> models;
  for (std::uint64_t s = 0; s < 6; ++s) models.push_back(RandomNet(arch, s));
  CorrelationOptions o;
  o.permutations_per_model = 3;
  o.noise = 0.01;
  const auto r = weight_behavior_correlation(models, arch, probe, o);
  CHECK(r.pairs == 18 * 17 / 2 - 6 * 3);
  CHECK(std::abs(r.rho) <= 1.0);
  CHECK(r.rho == weight_behavior_correlation(models, arch, probe, o).rho);
  o.kind = SimKind::kCos;
  CHECK(std::abs(weight_behavior_correlation(models, arch, probe, o).rho) <= 1.0);
}

TEST_CASE("soup_average") {
  const auto arch = nn::tetris_architecture(Activation::kTanh);
  const auto w = RandomNet(arch, 1);
  std::vector<ModelWeights> one{w};
  CHECK(soup_average(one, false) == w);
  CHECK(soup_average(one, true) == w);
  std::vector<ModelWeights> pair{w, symmetry::apply_permutation(w, symmetry::random_permutation_set(arch, 4))};
  CHECK(soup_average(pair, true, &w) == w);
  CHECK_FALSE(soup_average(pair, false) == w);
  const auto u = RandomNet(arch, 2);
  std::vector<ModelWeights> two{w, u};
  const auto s = soup_average(two, false);
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(s.flat()[i] == doctest::Approx((w.flat()[i] + u.flat()[i]) / 2.0));
  CHECK_THROWS_AS(soup_average(std::vector<ModelWeights>{}, false), Error);
}

TEST_CASE("fit_probe: exact linear targets, normal-equation oracle, pseudoinverse") {
  const Matrix x = Gaussian(40, 4, 3);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = 0.5 + 2 * x(i, 0) - x(i, 1) + 0.25 * x(i, 3);
  const auto p = fit_probe(x, y, 0.0);
  CHECK(r2_score(y, p.predict(x)).value >= 1.0 - 1e-9);
  CHECK(p.intercept == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(p.coefficients[0] == doctest::Approx(2.0).epsilon(1e-10));

  // 5x3 system solved by hand-rolled normal equations on [X 1].
  Matrix a(5, 3);
  const double vals[5][3] = {{1, 2, 0}, {0, 1, 1}, {2, 0, 1}, {1, 1, 1}, {3, 1, 0}};
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 3; ++c) a(r, c) = vals[r][c];
  const std::vector<double> t{1, 2, 0, 3, 1};
  Eigen::MatrixXd aug(5, 4);
  Eigen::VectorXd tv(5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 3; ++c) aug(r, c) = vals[r][c];
    aug(r, 3) = 1.0;
    tv(r) = t[std::size_t(r)];
  }
  const Eigen::VectorXd sol = (aug.transpose() * aug).inverse() * (aug.transpose() * tv);
  const auto q = fit_probe(a, t, 0.0);
  for (std::size_t c = 0; c < 3; ++c) CHECK(q.coefficients[c] == doctest::Approx(sol(Eigen::Index(c))).epsilon(1e-8));
  CHECK(q.intercept == doctest::Approx(sol(3)).epsilon(1e-8));

  // Duplicate column: minimum-norm solution splits the weight evenly.
  Matrix dup(30, 2);
  std::vector<double> yd(30);
  for (std::size_t i = 0; i < 30; ++i) {
    dup(i, 0) = dup(i, 1) = double(i % 7);
    yd[i] = 4.0 * double(i % 7);
  }
  const auto pd = fit_probe(dup, yd, 0.0);
  CHECK(pd.coefficients[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(pd.coefficients[1] == doctest::Approx(2.0).epsilon(1e-8));
  // pseudoinverse oracle on the centered system
  Eigen::MatrixXd xc(30, 2);
  Eigen::VectorXd yc(30);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < 30; ++i) {
    mx += dup(i, 0) / 30.0;
    my += yd[i] / 30.0;
  }
  for (int i = 0; i < 30; ++i) {
    xc(i, 0) = xc(i, 1) = dup(std::size_t(i), 0) - mx;
    yc(i) = yd[std::size_t(i)] - my;
  }
  const Eigen::VectorXd pinv = xc.completeOrthogonalDecomposition().pseudoInverse() * yc;
  CHECK(std::abs(pd.coefficients[0] - pinv(0)) <= 1e-8 * std::abs(pinv(0)));

  CHECK_THROWS_AS(fit_probe(Matrix(1, 2), std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(fit_probe(x, y, -1.0), Error);
}

TEST_CASE("r2 conventions") {
  const std::vector<double> c(5, 3.0);
  const auto r = r2_score(c, std::vector<double>{1, 2, 3, 4, 5});
  CHECK(r.value == 0.0);
  CHECK(r.degenerate);
  const std::vector<double> t{1, 2, 3};
  CHECK(r2_score(t, std::vector<double>{3, 2, 1}).value == doctest::Approx(-3.0));
  CHECK(r2_score(t, t).value == 1.0);
}

TEST_CASE("kendall tau-b matches brute force") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> rev{5, 4, 3, 2, 1};
  CHECK(kendall_tau(a, a) == doctest::Approx(1.0));
  CHECK(kendall_tau(a, rev) == doctest::Approx(-1.0));
  CHECK(kendall_tau(a, std::vector<double>(5, 1.0)) == 0.0);
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> x(20), y(20);
    for (std::size_t i = 0; i < 20; ++i) {
      x[i] = double(uniform_index(rng, trial % 2 ? 5 : 1000));  // ties on odd trials
      y[i] = double(uniform_index(rng, trial % 3 ? 6 : 1000));
    }
    double c = 0, d = 0, tx = 0, ty = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t j = i + 1; j < 20; ++j) {
        const double sx = (x[i] > x[j]) - (x[i] < x[j]);
        const double sy = (y[i] > y[j]) - (y[i] < y[j]);
        if (sx == 0 && sy == 0) continue;
        if (sx == 0) { ++tx; continue; }
        if (sy == 0) { ++ty; continue; }
        (sx == sy ? c : d) += 1;
      }
    }
    const double brute = (c - d) / std::sqrt((c + d + tx) * (c + d + ty));
    CHECK(kendall_tau(x, y) == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("categorical probe") {
  // separable two-class toy
  Matrix x(40, 2);
  std::vector<int> y(40);
  Rng rng(1);
  for (std::size_t i = 0; i < 40; ++i) {
    y[i] = int(i % 2);
    x(i, 0) = (y[i] ? 2.0 : -2.0) + 0.3 * standard_normal(rng);
    x(i, 1) = standard_normal(rng);
  }
  const auto r = fit_categorical_probe(x, y, x, y, 2);
  CHECK(r.train_accuracy == 1.0);
  CHECK(fit_categorical_probe(x, y, x, y, 2).test_accuracy == r.test_accuracy);

  // three separable clusters vs one-vs-rest least squares
  Matrix x3(90, 3);
  std::vector<int> y3(90);
  for (std::size_t i = 0; i < 90; ++i) {
    y3[i] = int(i % 3);
    for (std::size_t c = 0; c < 3; ++c) x3(i, c) = (std::size_t(y3[i]) == c ? 3.0 : 0.0) + 0.4 * standard_normal(rng);
  }
  const auto soft = fit_categorical_probe(x3, y3, x3, y3, 3);
  std::vector<std::vector<double>> scores(3);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> t(90);
    for (std::size_t i = 0; i < 90; ++i) t[i] = y3[i] == k ? 1.0 : 0.0;
    scores[std::size_t(k)] = fit_probe(x3, t, 0.0).predict(x3);
  }
  double ovr = 0.0;
  for (std::size_t i = 0; i < 90; ++i) {
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (scores[std::size_t(k)][i] > scores[std::size_t(best)][i]) best = k;
    ovr += best == y3[i];
  }
  CHECK(std::abs(soft.test_accuracy - ovr / 90.0) <= 0.05);

  // shuffled labels: chance level out of sample
  Matrix xr = Gaussian(400, 5, 9);
  std::vector<int> yr(400);
  for (auto& v : yr) v = int(uniform_index(rng, 4));
  Matrix xtr(200, 5), xte(200, 5);
  for (std::size_t i = 0; i < 200; ++i) {
    std::copy(xr.row(i).begin(), xr.row(i).end(), xtr.row(i).begin());
    std::copy(xr.row(200 + i).begin(), xr.row(200 + i).end(), xte.row(i).begin());
  }
  const auto chance = fit_categorical_probe(xtr, std::span(yr).first(200), xte, std::span(yr).last(200), 4);
  CHECK(std::abs(chance.test_accuracy - 0.25) <= 0.15);
}

TEST_CASE("probe suite on a zoo") {
  const auto& z = SmallZoo();
  const auto samples = probe_samples(z, 5);
  for (const auto& s : samples) {
    CHECK(s.epoch % 5 == 0);
    CHECK(s.ggap >= -1.0);
    CHECK(s.ggap <= 1.0);
  }
  const auto rows = probe_suite(z, "s(W)", stat_features());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].target == "acc");
  CHECK(rows[1].target == "eph");
  CHECK(rows[2].target == "ggap");
  for (const auto& r : rows) CHECK(r.test_r2 <= 1.0);
  const auto again = probe_suite(z, "s(W)", stat_features());
  CHECK(again[1].test_r2 == rows[1].test_r2);
  // fitted probes explain their own training targets at least as well as unseen ones
  int train_better = 0;
  for (const auto& r : rows) train_better += r.train_r2 >= r.test_r2;
  CHECK(train_better >= 2);

  ProbeSuiteOptions opts;
  opts.categorical = true;
  const auto with_cat = probe_suite(z, "W", raw_weight_features(), opts);
  REQUIRE(with_cat.size() == 5);
  CHECK(with_cat[3].test_accuracy.has_value());
  std::ostringstream os;
  write_probe_csv(with_cat, os, 1);
  CHECK(os.str().find("feature,target,n_train,n_test,train_r2,test_r2,kendall_tau,test_accuracy,degenerate\n") != std::string::npos);
}

TEST_CASE("s(W) beats raw weights for accuracy on a hyperparameter-varied zoo") {
  auto f = zoo::hyp_rand_config(1, 10, 3);
  f.dataset.n_per_class = 40;
  const auto z = zoo::generate_zoo(f);
  const auto w = probe_suite(z, "W", raw_weight_features());
  const auto s = probe_suite(z, "s(W)", stat_features());
  CHECK(s[0].test_r2 >= w[0].test_r2);
}
