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

#include "hz/autodiff/parameters.hpp"

#include <algorithm>

#include "hz/core/error.hpp"

namespace hz::ad {

std::size_t ParameterStore::add(std::string name, const Matrix& init) {
  require(find(name) == count(), ErrorKind::kInvalidArgument, "duplicate parameter " + name);
  Entry e{std::move(name), init.rows(), init.cols(), values_.size()};
  values_.insert(values_.end(), init.values().begin(), init.values().end());
  grads_.resize(values_.size(), 0.0);
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

std::size_t ParameterStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return entries_.size();
}

Matrix ParameterStore::value(std::size_t i) const {
  const auto v = values(i);
  return Matrix(entries_[i].rows, entries_[i].cols, std::vector<double>(v.begin(), v.end()));
}

std::span<double> ParameterStore::values(std::size_t i) {
  const auto& e = entries_[i];
  return std::span<double>(values_).subspan(e.offset, e.rows * e.cols);
}

std::span<const double> ParameterStore::values(std::size_t i) const {
  const auto& e = entries_[i];
  return std::span<const double>(values_).subspan(e.offset, e.rows * e.cols);
}

std::span<double> ParameterStore::grads(std::size_t i) {
  const auto& e = entries_[i];
  return std::span<double>(grads_).subspan(e.offset, e.rows * e.cols);
}

void ParameterStore::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

}  // namespace hz::ad
