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
#include <span>
#include <string>
#include <vector>

#include "hz/core/matrix.hpp"

namespace hz::ad {

// Named trainable matrices stored back to back in one flat buffer, with a
// gradient buffer of the same layout. Declaration order is the flat order.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;
  };

  std::size_t add(std::string name, const Matrix& init);

  std::size_t count() const { return entries_.size(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t find(const std::string& name) const;

  Matrix value(std::size_t i) const;
  std::span<double> values(std::size_t i);
  std::span<const double> values(std::size_t i) const;
  std::span<double> grads(std::size_t i);

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }
  std::span<double> flat_grad() { return grads_; }
  std::span<const double> flat_grad() const { return grads_; }
  std::size_t size() const { return values_.size(); }

  void zero_grad();

 private:
  std::vector<Entry> entries_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

}  // namespace hz::ad
