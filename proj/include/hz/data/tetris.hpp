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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hz/core/matrix.hpp"

namespace hz::data {

// Labelled images, one row of `samples` per image.
struct ImageDataset {
  Matrix samples;
  std::vector<int> labels;
  std::string name;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  ImageDataset subset(const std::vector<std::size_t>& rows, const std::string& suffix) const;
  std::vector<std::size_t> class_histogram() const;
};

inline constexpr std::size_t kTetrisSide = 4;
inline constexpr std::size_t kTetrisPixels = kTetrisSide * kTetrisSide;
inline constexpr std::size_t kTetrisClasses = 4;

// Canonical shapes as (row, col) cells in their own bounding box:
// 0 = I (1x4 bar), 1 = O (2x2 square), 2 = L (3x2), 3 = S (2x3).
using Cells = std::array<std::array<int, 2>, 4>;
const std::array<Cells, kTetrisClasses>& tetris_shapes();

// Every placement of a shape that fits on the 4x4 grid, as pixel masks.
std::vector<std::array<double, kTetrisPixels>> tetris_placements(int shape);

// n_per_class samples of each shape; each sample is a uniformly chosen
// placement with active pixels at 1.0 plus N(0, sigma^2) noise clipped to
// [0, 1]. Samples are interleaved by class.
ImageDataset gen_tetris(std::size_t n_per_class, double pixel_noise_sigma, std::uint64_t seed);

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct DatasetSplits {
  ImageDataset train;
  ImageDataset val;
  ImageDataset test;
};

// Label-stratified, disjoint, exhaustive split. Global sizes are
// round(train*N), round(val*N) and the remainder. Throws
// Error(kInvalidArgument) if the ratios are negative or do not sum to 1.
DatasetSplits split(const ImageDataset& ds, const SplitRatios& ratios, std::uint64_t seed);

// "label,p0,...,p15" rows.
void write_csv(const ImageDataset& ds, std::ostream& out);

}  // namespace hz::data
