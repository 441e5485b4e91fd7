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
#include <vector>

#include "hz/core/matrix.hpp"

namespace hz::symmetry {

// Exact minimum-cost perfect matching on a square cost matrix in O(n^3).
// Returns assignment[row] = column.
std::vector<std::size_t> solve_assignment(const Matrix& cost);

// Same, maximizing the total score.
std::vector<std::size_t> solve_assignment_max(const Matrix& score);

}  // namespace hz::symmetry
