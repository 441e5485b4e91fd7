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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hz/core/matrix.hpp"

namespace hz::sampler {

// Which anchor a token's kernel is centered on. kPerToken draws an anchor
// independently for every token position, so one sample can mix tokens of
// different prompts. kPerSample draws one anchor for the whole sequence.
// Per-(token, dimension) marginals are the same under both.
enum class AnchorMode { kPerToken, kPerSample };

// Gaussian KDE per token position with a bandwidth per latent dimension.
struct TokenKDE {
  static constexpr double kBandwidthFloor = 1e-4;
  std::vector<Matrix> anchors;  // each N x d_z
  Matrix bandwidth;             // N x d_z
  AnchorMode mode = AnchorMode::kPerToken;

  std::size_t length() const { return bandwidth.rows(); }
  std::size_t dim() const { return bandwidth.cols(); }
};

// Silverman's rule per (token, dimension): 0.9 * min(std, IQR / 1.34) *
// n^(-1/5), using std alone when the IQR is 0, floored at kBandwidthFloor.
double silverman_bandwidth(std::vector<double> values);

// All prompts must share one shape.
TokenKDE fit_kde(const std::vector<Matrix>& prompts, AnchorMode mode = AnchorMode::kPerToken);
std::vector<Matrix> sample_latents(const TokenKDE& kde, std::size_t k, std::uint64_t seed);

// Independent normal per (token, dimension) with population moments.
struct GaussianPrior {
  Matrix mean;
  Matrix std;
};

GaussianPrior fit_gaussian_prior(const std::vector<Matrix>& population);
std::vector<Matrix> sample_latents(const GaussianPrior& prior, std::size_t k, std::uint64_t seed);

// CDF of the KDE marginal at (token, dim).
double kde_cdf(const TokenKDE& kde, std::size_t token, std::size_t dim, double x);

}  // namespace hz::sampler
