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

#include "hz/zoo/diversity.hpp"

#include <cmath>
#include <numeric>

#include "hz/core/csv.hpp"
#include "hz/core/error.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/simd/kernels.hpp"

namespace hz::zoo {
namespace {

std::pair<double, double> MeanStd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

Matrix Centered(const Matrix& m) {
  Matrix c = m;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, j);
    mean /= static_cast<double>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) c(i, j) -= mean;
  }
  return c;
}

double FrobeniusSq(const Matrix& m) { return simd::dot(m.data(), m.data(), m.size()); }

Matrix LayerOutput(const ModelRef& m, const Matrix& x, std::size_t layer) {
  require(layer < m.arch.num_layers(), ErrorKind::kInvalidArgument, "cka: layer out of range");
  nn::ForwardCache cache;
  nn::forward(*m.weights, m.arch, x, &cache);
  return cache.post[layer + 1];
}

}  // namespace

std::vector<ModelRef> final_models(const Zoo& zoo) {
  std::vector<ModelRef> out;
  for (const auto& t : zoo.models) {
    if (const Checkpoint* c = t.final_viable()) {
      out.push_back({t.model_id, &c->weights, zoo.architecture_of(t), &c->metrics});
    }
  }
  return out;
}

std::vector<ModelRef> final_models(const Zoo& zoo, Split split) {
  std::vector<ModelRef> out;
  for (auto& m : final_models(zoo))
    if (zoo.find(m.model_id)->split == split) out.push_back(std::move(m));
  return out;
}

Matrix agreement_kappa(std::span<const ModelRef> models, const Matrix& x) {
  require(x.rows() > 0, ErrorKind::kInvalidArgument, "agreement_kappa: no samples");
  std::vector<std::vector<int>> preds;
  for (const auto& m : models) preds.push_back(nn::predict(*m.weights, m.arch, x));
  const std::size_t n = models.size();
  Matrix k(n, n, 1.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      std::size_t same = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) same += preds[a][i] == preds[b][i];
      k(a, b) = k(b, a) = static_cast<double>(same) / static_cast<double>(x.rows());
    }
  return k;
}

double linear_cka(const Matrix& x, const Matrix& y) {
  require(x.rows() == y.rows(), ErrorKind::kShapeMismatch, "linear_cka: sample counts differ");
  const Matrix xc = Centered(x);
  const Matrix yc = Centered(y);
  const double cross = FrobeniusSq(matmul_tn(yc, xc));
  const double xx = std::sqrt(FrobeniusSq(matmul_tn(xc, xc)));
  const double yy = std::sqrt(FrobeniusSq(matmul_tn(yc, yc)));
  if (xx == 0.0 || yy == 0.0) return 0.0;
  return cross / (xx * yy);
}

Matrix cka_kappa(std::span<const ModelRef> models, const Matrix& probe, std::size_t layer) {
  std::vector<Matrix> acts;
  for (const auto& m : models) acts.push_back(LayerOutput(m, probe, layer));
  const std::size_t n = models.size();
  Matrix k(n, n, 1.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) k(a, b) = k(b, a) = linear_cka(acts[a], acts[b]);
  return k;
}

DistanceMatrices weight_distances(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  DistanceMatrices d{Matrix(n, n), Matrix(n, n)};
  if (n == 0) return d;
  std::vector<double> sq(n);
  double mean_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    require(w[i].size() == w[0].size(), ErrorKind::kShapeMismatch,
            "weight_distances: models differ in size");
    sq[i] = simd::dot(w[i].data(), w[i].data(), w[i].size());
    mean_sq += sq[i] / static_cast<double>(n);
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dist = simd::squared_distance(w[a].data(), w[b].data(), w[a].size());
      d.l2(a, b) = d.l2(b, a) = mean_sq > 0.0 ? dist / mean_sq : 0.0;
      const double dot = simd::dot(w[a].data(), w[b].data(), w[a].size());
      const double denom = sq[a] * sq[b];
      d.cos(a, b) = d.cos(b, a) = denom > 0.0 ? 1.0 - dot / denom : 1.0;
    }
  return d;
}

DistanceMatrices weight_distances(std::span<const ModelRef> models) {
  std::vector<std::vector<double>> flat;
  for (const auto& m : models) flat.push_back(m.weights->flatten());
  return weight_distances(flat);
}

std::pair<double, double> off_diagonal_stats(const Matrix& m) {
  std::vector<double> v;
  for (std::size_t a = 0; a < m.rows(); ++a)
    for (std::size_t b = a + 1; b < m.cols(); ++b) v.push_back(m(a, b));
  return MeanStd(v);
}

DiversityReport diversity_report(const Zoo& zoo, const data::ImageDataset& data,
                                 std::size_t cka_samples) {
  const auto models = final_models(zoo);
  DiversityReport r;
  r.models = models.size();
  r.nonviable = zoo.models.size() - models.size();
  if (models.empty()) return r;
  std::vector<double> acc;
  for (const auto& m : models) acc.push_back(m.metrics->test_acc);
  std::tie(r.test_acc_mean, r.test_acc_std) = MeanStd(acc);
  if (models.size() < 2) return r;

  std::vector<std::size_t> rows(std::min(cka_samples, data.size()));
  std::iota(rows.begin(), rows.end(), 0);
  const Matrix probe = data.subset(rows, "").samples;
  std::tie(r.agreement_mean, r.agreement_std) = off_diagonal_stats(agreement_kappa(models, data.samples));
  std::tie(r.cka_mean, r.cka_std) = off_diagonal_stats(cka_kappa(models, probe, 0));
  const auto dist = weight_distances(models);
  std::tie(r.l2_mean, r.l2_std) = off_diagonal_stats(dist.l2);
  std::tie(r.cos_mean, r.cos_std) = off_diagonal_stats(dist.cos);
  return r;
}

void write_csv(const DiversityReport& r, std::ostream& out, std::uint64_t hash) {
  CsvWriter csv(out, hash, {"metric", "value"});
  csv.row({std::string("models"), static_cast<long long>(r.models)});
  csv.row({std::string("nonviable"), static_cast<long long>(r.nonviable)});
  csv.row({std::string("test_acc_mean"), r.test_acc_mean});
  csv.row({std::string("test_acc_std"), r.test_acc_std});
  csv.row({std::string("agreement_mean"), r.agreement_mean});
  csv.row({std::string("agreement_std"), r.agreement_std});
  csv.row({std::string("cka_mean"), r.cka_mean});
  csv.row({std::string("cka_std"), r.cka_std});
  csv.row({std::string("l2_mean"), r.l2_mean});
  csv.row({std::string("l2_std"), r.l2_std});
  csv.row({std::string("cos_mean"), r.cos_mean});
  csv.row({std::string("cos_std"), r.cos_std});
}

}  // namespace hz::zoo
