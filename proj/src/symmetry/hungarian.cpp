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

#include "hz/symmetry/hungarian.hpp"

#include <limits>

#include "hz/core/error.hpp"

namespace hz::symmetry {

// Shortest augmenting path with row/column potentials (Kuhn-Munkres in the
// Jonker-Volgenant formulation). Indices are 1-based internally; slot 0 is a
// virtual column used to start each augmentation.
std::vector<std::size_t> solve_assignment(const Matrix& cost) {
  require(cost.rows() == cost.cols(), ErrorKind::kShapeMismatch,
          "solve_assignment: cost matrix must be square");
  const std::size_t n = cost.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      require(j1 != 0, ErrorKind::kDegenerate, "solve_assignment: non-finite costs");
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

std::vector<std::size_t> solve_assignment_max(const Matrix& score) {
  Matrix cost(score.rows(), score.cols());
  for (std::size_t i = 0; i < score.values().size(); ++i) cost.values()[i] = -score.values()[i];
  return solve_assignment(cost);
}

}  // namespace hz::symmetry
