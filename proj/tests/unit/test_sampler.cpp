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
#include <set>

#include "doctest.h"
#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/sampler/sampler.hpp"

using namespace hz;
using namespace hz::sampler;

namespace {

std::vector<Matrix> RandomPrompts(std::size_t count, std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Matrix> out;
  for (std::size_t e = 0; e < count; ++e) {
    Matrix m(n, d);
    for (double& v : m.values()) v = 2.0 * standard_normal(rng) + static_cast<double>(e % 3);
    out.push_back(m);
  }
  return out;
}

struct Small {
  zoo::Zoo zoo;
  hyperrep::HyperRep hr;
  data::DatasetSplits data;
  nn::Architecture arch;
};

const Small& Fixture() {
  static const Small s = [] {
    Small x;
    x.zoo = zoo::generate_zoo(zoo::seed_config(12, 5, 2));
    hyperrep::PretrainConfig c;
    c.epochs = 2;
    c.ae.head_hidden = 16;
    x.hr = hyperrep::pretrain(x.zoo, c).model;
    x.data = zoo::zoo_dataset(x.zoo.factors.dataset);
    x.arch = x.zoo.architecture_of(x.zoo.models.front());
    return x;
  }();
  return s;
}

std::vector<Matrix> TrainLatents(const Small& s) {
  return hyperrep::embed_models(s.hr, hyperrep::split_weights(s.zoo, zoo::Split::kTrain));
}

// Deterministic metric with deliberate ties: first weight rounded to 0.1.
double CoarseMetric(const nn::ModelWeights& w) { return std::round(w.flat()[0] * 10.0) / 10.0; }

}  // namespace

TEST_CASE("silverman bandwidth") {
  CHECK(silverman_bandwidth({3.0}) == TokenKDE::kBandwidthFloor);
  CHECK(silverman_bandwidth({2.0, 2.0, 2.0}) == TokenKDE::kBandwidthFloor);
  // 1..5: sample sd = sqrt(2.5), IQR = 2 (linear interpolation), so IQR / 1.34 wins
  const double h = silverman_bandwidth({5, 1, 3, 2, 4});
  CHECK(h == doctest::Approx(0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2)).epsilon(1e-12));
  const double h3 = silverman_bandwidth({0, 1, 2, 3, 4, 5, 6, 100});
  CHECK(h3 == doctest::Approx(0.9 * (3.5 / 1.34) * std::pow(8.0, -0.2)).epsilon(1e-12));
  // IQR collapses to 0 while the spread does not
  const double h2 = silverman_bandwidth({0, 0, 0, 0, 0, 0, 0, 10});
  const double sd = std::sqrt((100.0 - 8 * 1.5625) / 7);
  CHECK(h2 == doctest::Approx(0.9 * sd * std::pow(8.0, -0.2)).epsilon(1e-12));
}

TEST_CASE("fit_kde validation and single anchor concentration") {
  CHECK_THROWS_AS(fit_kde({}), Error);
  CHECK_THROWS_AS(fit_kde({Matrix(2, 3), Matrix(3, 3)}), Error);
  Matrix anchor(3, 2, std::vector<double>{1, -1, 0.5, 2, 3, 0});
  const auto kde = fit_kde({anchor});
  for (double h : kde.bandwidth.values()) CHECK(h == TokenKDE::kBandwidthFloor);
  const auto s = sample_latents(kde, 2000, 1);
  for (std::size_t i = 0; i < anchor.size(); ++i) {
    double ss = 0;
    for (const auto& m : s) ss += std::pow(m.values()[i] - anchor.values()[i], 2);
    CHECK(std::sqrt(ss / s.size()) < 3 * TokenKDE::kBandwidthFloor);
  }
  const auto same = fit_kde({anchor, anchor, anchor});
  for (double h : same.bandwidth.values()) CHECK(h == TokenKDE::kBandwidthFloor);
}

TEST_CASE("sample_latents: determinism, empty draw, independence") {
  const auto kde = fit_kde(RandomPrompts(20, 4, 3, 1));
  CHECK(sample_latents(kde, 0, 1).empty());
  const auto a = sample_latents(kde, 30, 9), b = sample_latents(kde, 30, 9), c = sample_latents(kde, 30, 10);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(!(a[0] == c[0]));
  // independent anchor dimensions give uncorrelated samples
  const auto s = sample_latents(kde, 10000, 2);
  double m0 = 0, m1 = 0;
  for (const auto& z : s) m0 += z(1, 0), m1 += z(1, 1);
  m0 /= s.size();
  m1 /= s.size();
  double cov = 0, v0 = 0, v1 = 0;
  for (const auto& z : s) {
    cov += (z(1, 0) - m0) * (z(1, 1) - m1);
    v0 += (z(1, 0) - m0) * (z(1, 0) - m0);
    v1 += (z(1, 1) - m1) * (z(1, 1) - m1);
  }
  // anchors are random, so their own sample correlation sets the scale
  CHECK(std::abs(cov / std::sqrt(v0 * v1)) < 0.5);
  Matrix x(2, 2, std::vector<double>{0, 0, 1, 1});
  Matrix y(2, 2, std::vector<double>{0, 1, 0, 1});
  Matrix w(2, 2, std::vector<double>{1, 0, 1, 0});
  Matrix q(2, 2, std::vector<double>{1, 1, 0, 0});
  const auto ind = sample_latents(fit_kde({x, y, w, q}), 10000, 3);
  double c01 = 0;
  for (const auto& z : ind) c01 += (z(0, 0) - 0.5) * (z(0, 1) - 0.5);
  CHECK(std::abs(c01 / ind.size()) < 0.02);
}

TEST_CASE("sample_latents marginals match the KDE") {
  for (AnchorMode mode : {AnchorMode::kPerToken, AnchorMode::kPerSample}) {
    const auto prompts = RandomPrompts(15, 3, 2, 4);
    const auto kde = fit_kde(prompts, mode);
    const std::size_t k = 10000;
    const auto s = sample_latents(kde, k, 5);
    for (std::size_t n = 0; n < 3; ++n) {
      for (std::size_t d = 0; d < 2; ++d) {
        std::vector<double> v;
        for (const auto& z : s) v.push_back(z(n, d));
        std::sort(v.begin(), v.end());
        double ks = 0;
        for (std::size_t i = 0; i < k; ++i) {
          const double f = kde_cdf(kde, n, d, v[i]);
          ks = std::max({ks, std::abs(f - static_cast<double>(i) / k), std::abs(f - static_cast<double>(i + 1) / k)});
        }
        CHECK(ks < 0.05);
        // sample mean within 3 standard errors of the anchor mean
        double am = 0, av = 0;
        for (const auto& p : prompts) am += p(n, d) / prompts.size();
        for (const auto& p : prompts) av += std::pow(p(n, d) - am, 2) / prompts.size();
        const double var = av + kde.bandwidth(n, d) * kde.bandwidth(n, d);
        double sm = 0;
        for (double x : v) sm += x / k;
        CHECK(std::abs(sm - am) < 3 * std::sqrt(var / k));
      }
    }
  }
}

TEST_CASE("per-sample mode keeps whole anchors") {
  Matrix a(2, 1, std::vector<double>{0, 0}), b(2, 1, std::vector<double>{100, 100});
  auto kde = fit_kde({a, b}, AnchorMode::kPerSample);
  for (double& h : kde.bandwidth.values()) h = 1.0;
  for (const auto& z : sample_latents(kde, 200, 1)) CHECK(std::abs(z(0, 0) - z(1, 0)) < 10);
  kde.mode = AnchorMode::kPerToken;
  std::size_t mixed = 0;
  for (const auto& z : sample_latents(kde, 200, 1)) mixed += std::abs(z(0, 0) - z(1, 0)) > 50 ? 1 : 0;
  CHECK(mixed > 50);
}

TEST_CASE("gaussian prior") {
  const auto pop = RandomPrompts(50, 2, 2, 7);
  const auto prior = fit_gaussian_prior(pop);
  double m = 0, v = 0;
  for (const auto& p : pop) m += p(1, 1) / pop.size();
  for (const auto& p : pop) v += std::pow(p(1, 1) - m, 2) / pop.size();
  CHECK(prior.mean(1, 1) == doctest::Approx(m));
  CHECK(prior.std(1, 1) == doctest::Approx(std::sqrt(v)));
  const auto s = sample_latents(prior, 10000, 1);
  double sm = 0;
  for (const auto& z : s) sm += z(1, 1) / s.size();
  CHECK(std::abs(sm - m) < 3 * std::sqrt(v / s.size()));
  CHECK(sample_latents(prior, 5, 3)[4] == sample_latents(prior, 5, 3)[4]);
}

TEST_CASE("decode_samples gives finite models of the right shape") {
  const auto& f = Fixture();
  const auto lat = TrainLatents(f);
  const auto w = decode_samples(f.hr, lat);
  REQUIRE(w.size() == lat.size());
  for (const auto& x : w) {
    CHECK(x.shapes() == nn::ModelWeights(f.arch).shapes());
    CHECK(x.all_finite());
  }
  CHECK(decode_samples(f.hr, lat)[0] == w[0]);
}

TEST_CASE("subsample audit") {
  const auto& f = Fixture();
  const auto kde = fit_kde(TrainLatents(f));
  const auto b = subsample(f.hr, kde, 30, 7, CoarseMetric, 3);
  REQUIRE(b.candidates.size() == 30);
  REQUIRE(b.selected.size() == 7);
  std::set<std::size_t> chosen(b.selected.begin(), b.selected.end());
  double min_sel = 1e300, max_rest = -1e300;
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(b.candidates[i].index == i);
    CHECK(b.candidates[i].metric == CoarseMetric(b.candidates[i].weights));
    if (chosen.count(i))
      min_sel = std::min(min_sel, b.candidates[i].metric);
    else
      max_rest = std::max(max_rest, b.candidates[i].metric);
  }
  CHECK(min_sel >= max_rest);
  // selection equals a stable sort by metric, so ties go to the lower index
  std::vector<std::size_t> order(30);
  for (std::size_t i = 0; i < 30; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return b.candidates[x].metric > b.candidates[y].metric;
  });
  CHECK(std::vector<std::size_t>(order.begin(), order.begin() + 7) == b.selected);
  CHECK(b.selected_mean() >= b.candidate_mean());

  const auto all = subsample(f.hr, kde, 10, 10, CoarseMetric, 3);
  CHECK(all.selected.size() == 10);
  CHECK_THROWS_AS(subsample(f.hr, kde, 3, 4, CoarseMetric, 3), Error);
  // parallel scoring does not change the result
  const auto par = subsample(f.hr, kde, 30, 7, CoarseMetric, 3, 4);
  CHECK(par.selected == b.selected);
  CHECK(par.candidates[5].weights == b.candidates[5].weights);
}

TEST_CASE("bootstrap structure") {
  const auto& f = Fixture();
  const auto kde = fit_kde(TrainLatents(f));
  const auto one = bootstrap(f.hr, kde, 1, 12, 3, CoarseMetric, 4);
  const auto sub = subsample(f.hr, kde, 12, 3, CoarseMetric, derive_seed(4, "bootstrap", 1));
  REQUIRE(one.iterations.size() == 1);
  CHECK(one.final_batch().selected == sub.selected);
  CHECK(one.final_batch().candidates[0].weights == sub.candidates[0].weights);

  const auto three = bootstrap(f.hr, fit_gaussian_prior(TrainLatents(f)), 3, 12, 3, CoarseMetric, 4);
  REQUIRE(three.iterations.size() == 3);
  CHECK(three.iterations[0].source == "gaussian");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& it = three.iterations[i];
    CHECK(it.iteration == i + 1);
    CHECK(!it.conditioning.empty());
    CHECK(it.batch.candidates.size() == 12);
    if (i > 0) {
      CHECK(it.source == "kde");
      CHECK(it.anchors.size() == 3);
      CHECK(it.mean_bandwidth > 0);
    }
  }
  CHECK(three.best_means().size() == 3);
  const auto again = bootstrap(f.hr, fit_gaussian_prior(TrainLatents(f)), 3, 12, 3, CoarseMetric, 4);
  CHECK(again.final_batch().candidates[2].weights == three.final_batch().candidates[2].weights);
}

TEST_CASE("kde30 anchors") {
  const auto& f = Fixture();
  const auto train = f.zoo.in_split(zoo::Split::kTrain);
  const auto all = kde30_anchors(f.zoo, 1.0);
  CHECK(all.size() == train.size());
  const auto top = kde30_anchors(f.zoo);
  CHECK(top.size() == static_cast<std::size_t>(std::ceil(0.3 * train.size())));
  std::vector<double> accs;
  for (const auto* t : train) accs.push_back(t->final_viable()->metrics.val_acc);
  std::sort(accs.begin(), accs.end());
  const double pos = 0.7 * (accs.size() - 1);
  const double p70 = accs[static_cast<std::size_t>(pos)] +
                     (pos - std::floor(pos)) * (accs[std::min(accs.size() - 1, static_cast<std::size_t>(pos) + 1)] -
                                                accs[static_cast<std::size_t>(pos)]);
  for (std::size_t id : top) CHECK(f.zoo.find(id)->final_viable()->metrics.val_acc >= p70 - 1e-12);
  CHECK_THROWS_AS(kde30_anchors(f.zoo, 0.0), Error);
}

TEST_CASE("finetune_eval") {
  const auto& f = Fixture();
  CHECK(report_epochs(0) == std::vector<std::size_t>{0});
  CHECK(report_epochs(5) == std::vector<std::size_t>{0, 1, 5});
  CHECK(report_epochs(7) == std::vector<std::size_t>{0, 1, 5, 7});
  CHECK(report_epochs(60) == std::vector<std::size_t>{0, 1, 5, 25, 50, 60});
  std::vector<nn::ModelWeights> models;
  for (const auto* t : f.zoo.in_split(zoo::Split::kTest)) models.push_back(t->checkpoints[0].weights);
  FinetuneOptions o;
  o.epochs = 0;
  const auto zero = finetune_eval(models, f.arch, f.data, o);
  CHECK(zero.epochs == std::vector<std::size_t>{0});
  for (std::size_t i = 0; i < models.size(); ++i)
    CHECK(zero.accuracy[i][0] ==
          nn::evaluate(models[i], f.arch, f.data.test.samples, f.data.test.labels).accuracy);
  o.epochs = 5;
  o.optimizer.learning_rate = 2e-2;
  const auto five = finetune_eval(models, f.arch, f.data, o);
  CHECK(five.accuracy[0][0] == zero.accuracy[0][0]);
  CHECK(five.mean()[2] > five.mean()[0]);
  CHECK(finetune_eval(models, f.arch, f.data, o).accuracy == five.accuracy);
}

TEST_CASE("weight-space KDE baseline") {
  const auto& f = Fixture();
  const auto* best = f.zoo.find(kde30_anchors(f.zoo).front());
  const auto& anchor = best->final_viable()->weights;
  const double acc = nn::evaluate(anchor, f.arch, f.data.val.samples, f.data.val.labels).accuracy;
  const auto copies = weight_space_kde_sample({anchor}, 10, 1);
  REQUIRE(copies.size() == 10);
  for (const auto& c : copies) {
    CHECK(c.shapes() == anchor.shapes());
    CHECK(std::abs(nn::evaluate(c, f.arch, f.data.val.samples, f.data.val.labels).accuracy - acc) <= 0.02);
  }
  CHECK(weight_space_kde_sample({anchor}, 3, 2)[1] == weight_space_kde_sample({anchor}, 3, 2)[1]);
}

TEST_CASE("anchored locality and sample zoo provenance") {
  const auto& f = Fixture();
  const auto lat = TrainLatents(f);
  TokenKDE tight = fit_kde({lat[0]});
  const auto anchor_model = decode_samples(f.hr, {lat[0]}).front();
  const auto metric = validation_accuracy(f.data, f.arch);
  const auto b = subsample(f.hr, tight, 8, 2, metric, 1);
  double dev = 0;
  for (const auto& c : b.candidates)
    for (std::size_t i = 0; i < c.weights.size(); ++i)
      dev = std::max(dev, std::abs(c.weights.flat()[i] - anchor_model.flat()[i]));
  double scale = 0;
  for (double v : anchor_model.flat()) scale = std::max(scale, std::abs(v));
  CHECK(dev < 1e-2 * scale);

  const auto z = sample_zoo(b, f.arch, f.data, "kde", {{"anchors", {0}}});
  REQUIRE(z.models.size() == 2);
  CHECK(z.models[0].provenance["strategy"] == "kde");
  CHECK(z.models[0].provenance["anchors"][0] == 0);
  CHECK(z.models[0].provenance["sample_index"] == b.selected[0]);
  CHECK(z.models[0].checkpoints.front().metrics.val_acc == doctest::Approx(b.candidates[b.selected[0]].metric));
  CHECK(sample_zoo(b, f.arch, f.data, "kde", {}, false).models.size() == 8);
}
