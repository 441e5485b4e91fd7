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

#include "hz/sampler/kde.hpp"

#include <algorithm>
#include <cmath>

#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"

namespace hz::sampler {
namespace {

double SortedQuantile(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

void RequireSameShape(const std::vector<Matrix>& ms, const char* what) {
  require(!ms.empty(), ErrorKind::kInvalidArgument, std::string(what) + ": no sequences");
  for (const auto& m : ms) {
    require(m.rows() == ms.front().rows() && m.cols() == ms.front().cols(),
            ErrorKind::kShapeMismatch, std::string(what) + ": sequences differ in shape");
  }
}

}  // namespace

double silverman_bandwidth(std::vector<double> values) {
  const std::size_t n = values.size();
  require(n >= 1, ErrorKind::kInvalidArgument, "bandwidth: no values");
  if (n < 2) return TokenKDE::kBandwidthFloor;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::sort(values.begin(), values.end());
  const double iqr = SortedQuantile(values, 0.75) - SortedQuantile(values, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return std::max(0.9 * spread * std::pow(static_cast<double>(n), -0.2), TokenKDE::kBandwidthFloor);
}

TokenKDE fit_kde(const std::vector<Matrix>& prompts, AnchorMode mode) {
  RequireSameShape(prompts, "fit_kde");
  TokenKDE kde;
  kde.mode = mode;
  kde.anchors = prompts;
  const std::size_t n = prompts.front().rows(), d = prompts.front().cols();
  kde.bandwidth = Matrix(n, d);
  std::vector<double> column(prompts.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t e = 0; e < prompts.size(); ++e) column[e] = prompts[e](r, c);
      kde.bandwidth(r, c) = silverman_bandwidth(column);
    }
  }
  return kde;
}

std::vector<Matrix> sample_latents(const TokenKDE& kde, std::size_t k, std::uint64_t seed) {
  require(!kde.anchors.empty(), ErrorKind::kInvalidArgument, "sample_latents: empty KDE");
  Rng rng(derive_seed(seed, "kde-sample"));
  std::vector<Matrix> out;
  out.reserve(k);
  for (std::size_t s = 0; s < k; ++s) {
    Matrix z(kde.length(), kde.dim());
    const std::size_t shared = uniform_index(rng, kde.anchors.size());
    for (std::size_t r = 0; r < z.rows(); ++r) {
      const Matrix& a = kde.anchors[kde.mode == AnchorMode::kPerSample
                                        ? shared
                                        : uniform_index(rng, kde.anchors.size())];
      for (std::size_t c = 0; c < z.cols(); ++c) {
        z(r, c) = a(r, c) + kde.bandwidth(r, c) * standard_normal(rng);
      }
    }
    out.push_back(std::move(z));
  }
  return out;
}

GaussianPrior fit_gaussian_prior(const std::vector<Matrix>& population) {
  RequireSameShape(population, "fit_gaussian_prior");
  const std::size_t n = population.front().rows(), d = population.front().cols();
  const double count = static_cast<double>(population.size());
  GaussianPrior g{Matrix(n, d), Matrix(n, d)};
  for (const auto& m : population) {
    for (std::size_t i = 0; i < m.size(); ++i) g.mean.values()[i] += m.values()[i] / count;
  }
  for (const auto& m : population) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double dv = m.values()[i] - g.mean.values()[i];
      g.std.values()[i] += dv * dv / count;
    }
  }
  for (double& v : g.std.values()) v = std::max(std::sqrt(v), TokenKDE::kBandwidthFloor);
  return g;
}

std::vector<Matrix> sample_latents(const GaussianPrior& prior, std::size_t k, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "gaussian-sample"));
  std::vector<Matrix> out;
  out.reserve(k);
  for (std::size_t s = 0; s < k; ++s) {
    Matrix z(prior.mean.rows(), prior.mean.cols());
    for (std::size_t i = 0; i < z.size(); ++i) {
      z.values()[i] = prior.mean.values()[i] + prior.std.values()[i] * standard_normal(rng);
    }
    out.push_back(std::move(z));
  }
  return out;
}

double kde_cdf(const TokenKDE& kde, std::size_t token, std::size_t dim, double x) {
  const double h = kde.bandwidth(token, dim);
  double sum = 0.0;
  for (const auto& a : kde.anchors) sum += 0.5 * std::erfc(-(x - a(token, dim)) / (h * std::sqrt(2.0)));
  return sum / static_cast<double>(kde.anchors.size());
}

}  // namespace hz::sampler
