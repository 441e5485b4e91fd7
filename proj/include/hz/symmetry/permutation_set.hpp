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

namespace hz::symmetry {

// One index array per hidden layer. Entry i of layer l names the source
// neuron that moves to position i: row i of the permuted W^l is row
// perm[l][i] of the original. The output layer is never permuted.
struct PermutationSet {
  std::vector<std::vector<std::size_t>> layers;

  friend bool operator==(const PermutationSet&, const PermutationSet&) = default;
};

}  // namespace hz::symmetry
