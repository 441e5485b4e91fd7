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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"
#include "hz/hyperrep/hyperrep.hpp"
#include "hz/nn/init.hpp"
#include "hz/symmetry/symmetry.hpp"

using namespace hz;
using namespace hz::hyperrep;

namespace {

nn::ModelWeights RandomWeights(const nn::Architecture& arch, std::uint64_t seed) {
  nn::ModelWeights w(arch);
  Rng rng(seed);
  for (double& v : w.flat()) v = standard_normal(rng);
  return w;
}

// Small trained AE shared by the statistical tests.
struct Trained {
  zoo::Zoo zoo;
  PretrainResult run;
  PretrainConfig config;
};

PretrainConfig SmallConfig() {
  PretrainConfig c;
  c.epochs = 20;
  c.learning_rate = 1e-3;
  c.ae.head_hidden = 64;
  c.seed = 5;
  return c;
}

const Trained& Fixture() {
  static const Trained t = [] {
    Trained x;
    x.zoo = zoo::generate_zoo(zoo::seed_config(60, 25, 3));
    x.config = SmallConfig();
    x.run = pretrain(x.zoo, x.config);
    return x;
  }();
  return t;
}

std::vector<nn::ModelWeights> FinalWeights(const zoo::Zoo& z, std::size_t limit) {
  std::vector<nn::ModelWeights> out;
  for (zoo::Split s : {zoo::Split::kTest, zoo::Split::kVal}) {
    for (const auto* t : z.in_split(s)) {
      if (out.size() < limit) out.push_back(t->final_viable()->weights);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("standardizer") {
  const auto arch = nn::tetris_architecture();
  std::vector<nn::ModelWeights> pop;
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto w = RandomWeights(arch, s);
    for (double& v : w.layer(1)) v = 3.0 * v + 7.0;
    pop.push_back(w);
  }
  const auto stats = fit_standardizer(pop);
  for (std::size_t l = 0; l < 2; ++l) {
    double sum = 0, n = 0;
    for (const auto& w : pop)
      for (double v : w.layer(l)) sum += v, n += 1;
    const double mean = sum / n;
    double ss = 0;
    for (const auto& w : pop)
      for (double v : w.layer(l)) ss += (v - mean) * (v - mean);
    CHECK(stats.mean[l] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(stats.std[l] == doctest::Approx(std::sqrt(ss / n)).epsilon(1e-12));
    // standardized population has mean 0 and std 1 per layer
    double s1 = 0, s2 = 0;
    for (const auto& w : pop) {
      const auto z = standardize(w, stats);
      for (double v : z.layer(l)) s1 += v, s2 += v * v;
    }
    CHECK(std::abs(s1 / n) < 1e-12);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (const auto& w : pop) {
    const auto back = destandardize(standardize(w, stats), stats);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(back.flat()[i] - w.flat()[i]) < 1e-9);
  }
  // constant layer across the population
  std::vector<nn::ModelWeights> flat(3, nn::ModelWeights(arch));
  for (auto& w : flat)
    for (double& v : w.layer(0)) v = 0.5;
  const auto fs = fit_standardizer(flat);
  CHECK(fs.std[0] == LayerNormStats::kStdFloor);
  const auto flat_z = standardize(flat[0], fs);
  for (double v : flat_z.layer(0)) CHECK(v == 0.0);
  CHECK_THROWS_AS(fit_standardizer(std::vector<nn::ModelWeights>{}), Error);
  const auto js = LayerNormStats::from_json(stats.to_json());
  CHECK(js.mean == stats.mean);
  CHECK(js.std == stats.std);
}

TEST_CASE("tokenize counts and positions on the tetris net") {
  const auto arch = nn::tetris_architecture();
  const auto w = RandomWeights(arch, 1);
  const auto ts = tokenize(w, 17);
  CHECK(ts.length() == 9);
  CHECK(tokens_in_layer(arch.layers[0], 17) == 5);
  CHECK(tokens_in_layer(arch.layers[1], 17) == 4);
  for (std::size_t n = 0; n < 5; ++n)
    for (std::size_t c = 0; c < 17; ++c) CHECK(ts.mask(n, c) == 1.0);
  CHECK(ts.positions[0] == Position{0, 0, 0});
  CHECK(ts.positions[5] == Position{5, 1, 0});
  CHECK(ts.positions[8] == Position{8, 1, 3});
  // layer-1 row r is [w(r, 0..15), b(r)]
  CHECK(ts.tokens(2, 3) == w.w(0, 2, 3));
  CHECK(ts.tokens(2, 16) == w.b(0, 2));
  CHECK(ts.tokens(6, 4) == w.w(1, 1, 4));
  CHECK(ts.tokens(6, 5) == w.b(1, 1));

  const auto t16 = tokenize(w, 16);
  CHECK(tokens_in_layer(arch.layers[0], 16) == 10);
  CHECK(t16.length() == 14);
  for (std::size_t r = 0; r < 5; ++r) {
    double ones = 0;
    for (std::size_t c = 0; c < 16; ++c) ones += t16.mask(2 * r + 1, c);
    CHECK(16 - ones == 15);
    CHECK(t16.tokens(2 * r + 1, 0) == w.b(0, r));
  }
  CHECK_THROWS_AS(tokenize(w, 0), Error);
}

TEST_CASE("tokenize invariants across architectures") {
  for (const auto& widths : std::vector<std::vector<std::size_t>>{{16, 5, 4}, {3, 7, 2}, {10, 4, 4, 3}, {2, 1, 2}}) {
    const auto arch = nn::Architecture::from_widths(widths);
    const auto w = RandomWeights(arch, widths.size());
    for (std::size_t d_t : {1, 2, 3, 5, 8, 17, 40}) {
      auto ts = tokenize(w, d_t);
      CHECK(ts.length() == sequence_length(arch, d_t));
      double ones = 0;
      for (double v : ts.mask.values()) ones += v;
      CHECK(ones == static_cast<double>(arch.parameter_count()));
      for (std::size_t n = 0; n < ts.length(); ++n) {
        CHECK(ts.positions[n][0] == n);
        CHECK(ts.positions[n][2] < tokens_in_layer(arch.layers[ts.positions[n][1]], d_t));
        for (std::size_t c = 0; c < d_t; ++c)
          if (ts.mask(n, c) == 0.0) CHECK(ts.tokens(n, c) == 0.0);
      }
      CHECK(detokenize(ts, arch) == w);
      for (std::size_t i = 0; i < ts.tokens.size(); ++i)
        if (ts.mask.values()[i] == 0.0) ts.tokens.values()[i] = 99.0;
      CHECK(detokenize(ts, arch) == w);
    }
  }
  const auto ts = tokenize(RandomWeights(nn::tetris_architecture(), 2), 17);
  CHECK_THROWS_AS(detokenize(ts, nn::Architecture::from_widths({16, 6, 4})), Error);
}

TEST_CASE("draw_windows") {
  CHECK(draw_windows(9, 4, 7, 1).size() == 7);
  for (const auto& w : draw_windows(9, 9, 20, 2)) CHECK(w.start == 0);
  for (const auto& w : draw_windows(9, 30, 5, 2)) {
    CHECK(w.start == 0);
    CHECK(w.length == 9);
  }
  const auto a = draw_windows(9, 4, 50, 3), b = draw_windows(9, 4, 50, 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].start == b[i].start);
  CHECK_THROWS_AS(draw_windows(0, 4, 1, 0), Error);

  // Starts are uniform, so token t is missed by one window with probability
  // 1 - c_t / S where S = N - ws + 1 starts exist and c_t of them cover t.
  // With k = 4 * ceil(N / ws) windows, coverage matches 1 - (1 - c_t/S)^k
  // and reaches 0.99 wherever c_t / S is large enough.
  for (auto [n, ws] : std::vector<std::pair<std::size_t, std::size_t>>{{9, 4}, {9, 8}, {20, 4}}) {
    const std::size_t k = 4 * ((n + ws - 1) / ws), starts = n - ws + 1, seeds = 2000;
    std::vector<double> covered(n, 0.0);
    for (std::uint64_t s = 0; s < seeds; ++s) {
      std::vector<bool> hit(n, false);
      for (const auto& w : draw_windows(n, ws, k, s))
        for (std::size_t t = w.start; t < w.start + ws; ++t) hit[t] = true;
      for (std::size_t t = 0; t < n; ++t) covered[t] += hit[t] ? 1.0 : 0.0;
    }
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t lo = t + 1 >= ws ? t + 1 - ws : 0, hi = std::min(t, starts - 1);
      const double c = static_cast<double>(hi - lo + 1) / static_cast<double>(starts);
      const double expect = 1.0 - std::pow(1.0 - c, static_cast<double>(k));
      CHECK(std::abs(covered[t] / seeds - expect) < 0.02);
      if (expect > 0.995) CHECK(covered[t] / seeds > 0.99);
    }
  }
}

TEST_CASE("plan_chunks covers every token once with flush windows") {
  for (std::size_t n : {1, 2, 5, 9, 10, 23}) {
    for (std::size_t length : {1, 2, 3, 4, 7, 12}) {
      for (std::size_t halo : {0, 1, 2}) {
        if (n > length && length <= 2 * halo) {
          CHECK_THROWS_AS(plan_chunks(n, length, halo), Error);
          continue;
        }
        const auto chunks = plan_chunks(n, length, halo);
        std::size_t next = 0;
        for (const auto& c : chunks) {
          CHECK(c.content_start == next);
          CHECK(c.content_end > c.content_start);
          CHECK(c.window_start <= c.content_start);
          CHECK(c.content_end <= c.window_start + std::min(length, n));
          CHECK(c.window_start + std::min(length, n) <= n);
          next = c.content_end;
        }
        CHECK(next == n);
        if (n <= length) CHECK(chunks.size() == 1);
        if (n > length) {
          CHECK(chunks.front().window_start == 0);
          CHECK(chunks.back().window_start == n - length);
        }
      }
    }
  }
  // interior windows keep the halo on both sides
  const auto c = plan_chunks(9, 4, 1);
  CHECK(c[1].window_start == 1);
  CHECK(c[1].content_start == 2);
  CHECK(c[1].content_end == 4);
}

TEST_CASE("autoencoder shapes, determinism, zero weights") {
  const auto arch = nn::tetris_architecture();
  AEConfig cfg;
  cfg.head_hidden = 16;
  Autoencoder ae(cfg, arch, 1);
  const auto ts = tokenize(RandomWeights(arch, 3), cfg.d_t);
  const Matrix z = ae.encode(ts.tokens, ts.positions);
  CHECK(z.rows() == 9);
  CHECK(z.cols() == cfg.d_z);
  CHECK(ae.encode(ts.tokens, ts.positions) == z);
  const Matrix y = ae.decode(z, ts.positions);
  CHECK(y.rows() == 9);
  CHECK(y.cols() == cfg.d_t);
  for (double v : y.values()) CHECK(std::isfinite(v));

  Autoencoder zero(cfg, arch, 1);
  for (double& v : zero.params().flat()) v = 0.0;
  const Matrix z0 = zero.encode(ts.tokens, ts.positions);
  CHECK(z0.rows() == 9);
  CHECK(zero.encode(ts.tokens, ts.positions) == z0);
  for (double v : z0.values()) CHECK(v == 0.0);
  const Matrix y0 = zero.decode(z0, ts.positions);
  for (double v : y0.values()) CHECK(v == 0.0);

  const auto emb = embed_sequences(ae, {ts.tokens}, {9, 0});
  CHECK(emb.front() == z);
  CHECK_THROWS_AS(embed_sequences(ae, {Matrix(8, cfg.d_t)}), Error);
  AEConfig bad = cfg;
  bad.d_z = 17;
  CHECK_THROWS_AS(Autoencoder(bad, arch, 0), Error);
  bad = cfg;
  bad.heads = 3;
  CHECK_THROWS_AS(Autoencoder(bad, arch, 0), Error);
  // windows longer than the sequence collapse to the sequence
  AEConfig wide = cfg;
  wide.window = 40;
  CHECK(Autoencoder(wide, arch, 0).config().window == 9);
}

TEST_CASE("composite loss gradient matches finite differences") {
  const auto arch = nn::Architecture::from_widths({3, 2, 2});
  AEConfig cfg;
  cfg.d_t = 4;
  cfg.d_z = 2;
  cfg.d_model = 8;
  cfg.depth = 2;
  cfg.heads = 2;
  cfg.window = 2;
  cfg.head_hidden = 6;
  cfg.head_layers = 2;
  cfg.head_out = 3;
  Autoencoder ae(cfg, arch, 4);
  const auto w = RandomWeights(arch, 8);
  const auto ts = tokenize(w, cfg.d_t);
  const auto other = tokenize(symmetry::add_noise(w, 0.3, 1), cfg.d_t);
  TrainingBatch b;
  b.view1 = Matrix(4, cfg.d_t);
  b.view2 = Matrix(4, cfg.d_t);
  b.mask = Matrix(4, cfg.d_t);
  for (std::size_t i = 0; i < 2; ++i) {  // windows at starts 0 and 2
    const std::size_t start = 2 * i;
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < cfg.d_t; ++c) {
        b.view1(2 * i + r, c) = ts.tokens(start + r, c);
        b.view2(2 * i + r, c) = other.tokens(start + r, c);
        b.mask(2 * i + r, c) = ts.mask(start + r, c);
      }
      b.positions.push_back(ts.positions[start + r]);
    }
  }
  auto loss = [&] {
    ad::Tape t(&ae.params());
    return t.value(composite_loss(t, ae, b, 0.3, 0.5).total)(0, 0);
  };
  ae.params().zero_grad();
  {
    ad::Tape t(&ae.params());
    t.backward(composite_loss(t, ae, b, 0.3, 0.5).total);
  }
  const std::vector<double> analytic(ae.params().flat_grad().begin(), ae.params().flat_grad().end());
  double worst = 0.0, num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ae.params().size(); ++i) {
    double& p = ae.params().flat()[i];
    const double orig = p, h = 1e-5;
    p = orig + h;
    const double fp = loss();
    p = orig - h;
    const double fm = loss();
    p = orig;
    const double fd = (fp - fm) / (2 * h);
    num += (fd - analytic[i]) * (fd - analytic[i]);
    den += fd * fd;
    if (std::abs(fd) > 1e-4) worst = std::max(worst, std::abs(fd - analytic[i]) / std::abs(fd));
  }
  CHECK(std::sqrt(num / den) < 1e-5);
  CHECK(worst < 1e-3);

  ad::Tape t(&ae.params());
  const auto terms = composite_loss(t, ae, b, 0.0, 0.5);
  CHECK(terms.contrastive == 0.0);
  CHECK(t.value(terms.total)(0, 0) == terms.reconstruction);
}

TEST_CASE("aggregate") {
  Matrix one(1, 3, std::vector<double>{1, -2, 3});
  CHECK(aggregate(one) == std::vector<double>{1, -2, 3});
  Matrix z(4, 2, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 9});
  const auto m = aggregate(z);
  CHECK(m[0] == doctest::Approx(4.0));
  CHECK(m[1] == doctest::Approx(21.0 / 4));
  Matrix swapped(4, 2, std::vector<double>{7, 9, 3, 4, 1, 2, 5, 6});
  CHECK(aggregate(swapped) == m);
  CHECK_THROWS_AS(aggregate(Matrix()), Error);
}

TEST_CASE("pretrain bookkeeping and determinism") {
  const auto z = zoo::generate_zoo(zoo::seed_config(8, 3, 1));
  PretrainConfig c;
  c.epochs = 2;
  c.ae.head_hidden = 8;
  c.batch_size = 8;
  std::vector<std::size_t> seen;
  const auto a = pretrain(z, c, [&](const EpochRecord& r) { seen.push_back(r.batches); });
  CHECK(a.curve.size() == 3);
  CHECK(seen.size() == 3);
  CHECK(seen[0] == 0);
  CHECK(seen[1] > 0);
  CHECK(seen[2] == 2 * seen[1]);
  const auto b = pretrain(z, c);
  CHECK(std::equal(a.model.ae.params().flat().begin(), a.model.ae.params().flat().end(),
                   b.model.ae.params().flat().begin()));
  CHECK(a.curve.back().val_reconstruction == b.curve.back().val_reconstruction);
  c.seed = 1;
  const auto d = pretrain(z, c);
  CHECK(d.model.ae.params().flat()[0] != a.model.ae.params().flat()[0]);

  zoo::Zoo none = z;
  for (auto& t : none.models) t.split = zoo::Split::kTest;
  CHECK_THROWS_AS(pretrain(none, c), Error);
  c.gamma = 1.5;
  CHECK_THROWS_AS(pretrain(z, c), Error);
  const auto back = PretrainConfig::from_json(a.model.config.to_json());
  CHECK(back.to_json() == a.model.config.to_json());
}

TEST_CASE("checkpoint round trip and embeddings csv") {
  const auto z = zoo::generate_zoo(zoo::seed_config(6, 2, 2));
  PretrainConfig c;
  c.epochs = 1;
  c.ae.head_hidden = 8;
  const auto r = pretrain(z, c);
  const auto dir = std::filesystem::temp_directory_path() / "hz_test_hyperrep";
  std::filesystem::create_directories(dir);
  const auto file = dir / "ae.hzae";
  save_hyperrep(r.model, file);
  const HyperRep back = load_hyperrep(file);
  CHECK(back.config.to_json() == r.model.config.to_json());
  CHECK(back.stats.mean == r.model.stats.mean);
  CHECK(back.reference.has_value());
  CHECK(*back.reference == *r.model.reference);
  const auto& pa = r.model.ae.params().flat();
  const auto& pb = back.ae.params().flat();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pb[i] == static_cast<double>(static_cast<float>(pa[i])));

  {
    std::ofstream out(dir / "bad.hzae", std::ios::binary);
    out << "nope";
  }
  try {
    load_hyperrep(dir / "bad.hzae");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
  }
  CHECK_THROWS_AS(load_hyperrep(dir / "missing.hzae"), Error);

  const auto w = z.models[0].final_viable()->weights;
  const auto emb = embed_models(back, {w, w});
  write_embeddings_csv(dir / "emb.csv", {0, 7}, emb, 0xabc);
  std::ifstream in(dir / "emb.csv");
  std::string header, columns, first;
  std::getline(in, header);
  std::getline(in, columns);
  std::getline(in, first);
  CHECK(header.rfind("#", 0) == 0);
  CHECK(columns == "model_id,token,z0,z1,z2,z3,z4,z5,z6,z7");
  CHECK(first.rfind("0,0,", 0) == 0);
  std::size_t rows = 2;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 1 + 2 * 9);
  std::filesystem::remove_all(dir);
}

TEST_CASE("trained autoencoder: learning and reconstruction") {
  const auto& f = Fixture();
  CHECK(f.run.curve.back().val_reconstruction < f.run.curve.front().val_reconstruction);
  const auto test = split_weights(f.run.prepared, zoo::Split::kTest);
  const auto score = reconstruction_score(f.run.model, test);
  MESSAGE("test reconstruction R2 " << score.r2);
  CHECK(score.r2 >= 0.5);
  // decoding an embedding reproduces the model about as well as the AE does
  const auto dec = decode_models(f.run.model, embed_models(f.run.model, test));
  double sse = 0, sst = 0;
  const std::size_t p = dec.front().size();
  std::vector<double> mean(p, 0.0);
  std::vector<std::vector<double>> truth;
  for (const auto& w : test) {
    truth.push_back(standardize(w, f.run.model.stats).flatten());
    for (std::size_t j = 0; j < p; ++j) mean[j] += truth.back()[j] / static_cast<double>(test.size());
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto d = standardize(dec[i], f.run.model.stats).flatten();
    for (std::size_t j = 0; j < p; ++j) {
      sse += (d[j] - truth[i][j]) * (d[j] - truth[i][j]);
      sst += (truth[i][j] - mean[j]) * (truth[i][j] - mean[j]);
    }
  }
  MESSAGE("decode(embed) R2 " << 1 - sse / sst);
  CHECK(std::abs((1 - sse / sst) - score.r2) <= 0.05);
}

TEST_CASE("trained autoencoder: halo context") {
  const auto& f = Fixture();
  const auto models = FinalWeights(f.run.prepared, 10);
  REQUIRE(models.size() == 10);
  // Same two-token content chunks with and without one halo token per side,
  // measured against a single full-sequence window on interior tokens.
  const auto full = embed_models(f.run.model, models, {9, 0});
  const auto with_halo = embed_models(f.run.model, models, {4, 1});
  const auto no_halo = embed_models(f.run.model, models, {2, 0});
  double d_halo = 0, d_plain = 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    REQUIRE(with_halo[i].rows() == 9);
    for (std::size_t r = 1; r + 1 < 9; ++r) {
      for (std::size_t c = 0; c < full[i].cols(); ++c) {
        d_halo += std::pow(with_halo[i](r, c) - full[i](r, c), 2);
        d_plain += std::pow(no_halo[i](r, c) - full[i](r, c), 2);
      }
    }
  }
  MESSAGE("interior distance to full window: halo " << d_halo << ", none " << d_plain);
  CHECK(d_halo < d_plain);
}

TEST_CASE("raising gamma trades reconstruction for contrast") {
  const auto& f = Fixture();
  PretrainConfig c = f.config;
  c.gamma = 0.9;
  const auto heavy = pretrain(f.zoo, c);
  const auto test = split_weights(f.run.prepared, zoo::Split::kTest);
  const double base = reconstruction_score(f.run.model, test).r2;
  const double more = reconstruction_score(heavy.model, test).r2;
  MESSAGE("R2 at gamma 0.05: " << base << ", at 0.9: " << more);
  CHECK(more < base);
}
