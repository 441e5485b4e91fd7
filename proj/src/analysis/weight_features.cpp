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

#include "hz/analysis/weight_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "hz/core/error.hpp"

namespace hz::analysis {

std::vector<double> WeightStats::features() const {
  std::vector<double> out;
  out.reserve(layers.size() * kPerLayer);
  for (const auto& s : layers) {
    out.insert(out.end(), {s.mean, s.std, s.q0, s.q25, s.q50, s.q75, s.q100});
  }
  return out;
}

double sorted_quantile(std::span<const double> sorted, double q) {
  require(!sorted.empty(), ErrorKind::kInvalidArgument, "quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return frac == 0.0 ? sorted[lo] : sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

WeightStats weight_stats(const nn::ModelWeights& w) {
  WeightStats out;
  for (std::size_t l = 0; l < w.num_layers(); ++l) {
    std::vector<double> v(w.layer(l).begin(), w.layer(l).end());
    // Sum in sorted order so the result does not depend on storage order.
    std::sort(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    out.layers.push_back({mean, std::sqrt(var), v.front(), sorted_quantile(v, 0.25),
                          sorted_quantile(v, 0.5), sorted_quantile(v, 0.75), v.back()});
  }
  return out;
}

double matrix_entropy(const Matrix& w) {
  const std::size_t k = std::min(w.rows(), w.cols());
  if (k <= 1) return 0.0;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      w.data(), static_cast<Eigen::Index>(w.rows()), static_cast<Eigen::Index>(w.cols()));
  const Eigen::MatrixXd gram = w.rows() <= w.cols() ? Eigen::MatrixXd(m * m.transpose())
                                                    : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorKind::kDegenerate,
          "matrix_entropy: eigen decomposition failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  double total = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) total += std::max(ev[i], 0.0);
  if (!(total > 0.0)) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double p = std::max(ev[i], 0.0) / total;
    if (p > 0.0) s -= p * std::log(p);
  }
  return std::clamp(s / std::log(static_cast<double>(k)), 0.0, 1.0);
}

Matrix layer_matrix(const nn::ModelWeights& w, std::size_t l) {
  const auto& s = w.shape(l);
  Matrix m(s.out_dim, s.in_dim);
  std::copy(w.weight(l).begin(), w.weight(l).end(), m.values().begin());
  return m;
}

std::size_t largest_layer(const nn::Architecture& arch) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < arch.num_layers(); ++l) {
    const auto& a = arch.layers[l];
    const auto& b = arch.layers[best];
    if (a.in_dim * a.out_dim > b.in_dim * b.out_dim) best = l;
  }
  return best;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, 0.5);
}

std::vector<double> entropy_trajectory(const zoo::Zoo& z, std::optional<std::size_t> layer) {
  const nn::Architecture arch = nn::Architecture::from_widths(z.factors.widths, nn::Activation::kTanh);
  const std::size_t l = layer.value_or(largest_layer(arch));
  require(l < arch.num_layers(), ErrorKind::kInvalidArgument, "entropy_trajectory: bad layer");
  std::vector<std::vector<double>> per_epoch(z.factors.epochs + 1);
  for (const auto& t : z.models) {
    for (const auto& c : t.checkpoints) {
      if (c.viable && c.epoch < per_epoch.size()) {
        per_epoch[c.epoch].push_back(matrix_entropy(layer_matrix(c.weights, l)));
      }
    }
  }
  std::vector<double> out;
  for (auto& v : per_epoch) out.push_back(median(std::move(v)));
  return out;
}

}  // namespace hz::analysis
