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

#include "hz/data/tetris.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"

namespace hz::data {

ImageDataset ImageDataset::subset(const std::vector<std::size_t>& rows,
                                  const std::string& suffix) const {
  ImageDataset out;
  out.name = name + suffix;
  out.num_classes = num_classes;
  out.samples = Matrix(rows.size(), samples.cols());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(samples.row(rows[i]).begin(), samples.row(rows[i]).end(),
              out.samples.row(i).begin());
    out.labels[i] = labels[rows[i]];
  }
  return out;
}

std::vector<std::size_t> ImageDataset::class_histogram() const {
  std::vector<std::size_t> h(num_classes, 0);
  for (int y : labels) ++h[static_cast<std::size_t>(y)];
  return h;
}

const std::array<Cells, kTetrisClasses>& tetris_shapes() {
  static const std::array<Cells, kTetrisClasses> shapes{{
      {{{0, 0}, {0, 1}, {0, 2}, {0, 3}}},  // I
      {{{0, 0}, {0, 1}, {1, 0}, {1, 1}}},  // O
      {{{0, 0}, {1, 0}, {2, 0}, {2, 1}}},  // L
      {{{0, 1}, {0, 2}, {1, 0}, {1, 1}}},  // S
  }};
  return shapes;
}

std::vector<std::array<double, kTetrisPixels>> tetris_placements(int shape) {
  const Cells& cells = tetris_shapes().at(static_cast<std::size_t>(shape));
  int height = 0, width = 0;
  for (const auto& c : cells) {
    height = std::max(height, c[0] + 1);
    width = std::max(width, c[1] + 1);
  }
  std::vector<std::array<double, kTetrisPixels>> out;
  const int side = static_cast<int>(kTetrisSide);
  for (int dr = 0; dr + height <= side; ++dr) {
    for (int dc = 0; dc + width <= side; ++dc) {
      std::array<double, kTetrisPixels> img{};
      for (const auto& c : cells) {
        img[static_cast<std::size_t>((c[0] + dr) * side + c[1] + dc)] = 1.0;
      }
      out.push_back(img);
    }
  }
  return out;
}

ImageDataset gen_tetris(std::size_t n_per_class, double pixel_noise_sigma, std::uint64_t seed) {
  require(n_per_class >= 1, ErrorKind::kInvalidArgument, "gen_tetris: n_per_class must be >= 1");
  require(pixel_noise_sigma >= 0.0, ErrorKind::kInvalidArgument,
          "gen_tetris: sigma must be >= 0");
  std::array<std::vector<std::array<double, kTetrisPixels>>, kTetrisClasses> placements;
  for (std::size_t c = 0; c < kTetrisClasses; ++c) placements[c] = tetris_placements(static_cast<int>(c));

  ImageDataset ds;
  ds.name = "tetris";
  ds.num_classes = kTetrisClasses;
  ds.samples = Matrix(n_per_class * kTetrisClasses, kTetrisPixels);
  ds.labels.resize(n_per_class * kTetrisClasses);
  Rng rng(derive_seed(seed, "tetris"));
  std::normal_distribution<double> noise(0.0, pixel_noise_sigma > 0.0 ? pixel_noise_sigma : 1.0);
  std::size_t row = 0;
  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (std::size_t c = 0; c < kTetrisClasses; ++c, ++row) {
      const auto& img = placements[c][uniform_index(rng, placements[c].size())];
      for (std::size_t p = 0; p < kTetrisPixels; ++p) {
        double v = img[p];
        if (pixel_noise_sigma > 0.0) v = std::clamp(v + noise(rng), 0.0, 1.0);
        ds.samples(row, p) = v;
      }
      ds.labels[row] = static_cast<int>(c);
    }
  }
  return ds;
}

DatasetSplits split(const ImageDataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  require(ratios.train >= 0.0 && ratios.val >= 0.0 && ratios.test >= 0.0,
          ErrorKind::kInvalidArgument, "split: negative ratio");
  require(std::abs(ratios.train + ratios.val + ratios.test - 1.0) <= 1e-9,
          ErrorKind::kInvalidArgument, "split: ratios must sum to 1");
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
  const auto n_val = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(n))));

  // Spread each class evenly over [0, 1) and cut the merged order; every
  // class then lands in each split within one sample of its share.
  Rng rng(derive_seed(seed, "split"));
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  struct Keyed {
    double key;
    std::size_t cls;
    std::size_t index;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(n);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) {
      keyed.push_back({(static_cast<double>(j) + 0.5) / static_cast<double>(members.size()), c,
                       members[j]});
    }
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.key != b.key ? a.key < b.key : a.cls < b.cls;
  });
  std::vector<std::size_t> train, val, test;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    auto& dst = i < n_train ? train : (i < n_train + n_val ? val : test);
    dst.push_back(keyed[i].index);
  }
  return {ds.subset(train, "/train"), ds.subset(val, "/val"), ds.subset(test, "/test")};
}

void write_csv(const ImageDataset& ds, std::ostream& out) {
  out << "label";
  for (std::size_t p = 0; p < ds.samples.cols(); ++p) out << ",p" << p;
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (double v : ds.samples.row(i)) out << "," << v;
    out << "\n";
  }
}

}  // namespace hz::data
