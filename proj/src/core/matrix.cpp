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

#include "hz/core/matrix.hpp"

#include <algorithm>
#include <string>

#include "hz/core/error.hpp"
#include "hz/simd/kernels.hpp"

namespace hz {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows * cols, ErrorKind::kShapeMismatch,
          "Matrix: data length " + std::to_string(data_.size()) +
              " != " + std::to_string(rows * cols));
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorKind::kShapeMismatch, "matmul: inner dims differ");
  Matrix c(a.rows(), b.cols());
  simd::gemm_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), ErrorKind::kShapeMismatch, "matmul_nt: inner dims differ");
  Matrix c(a.rows(), b.rows());
  simd::gemm_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), ErrorKind::kShapeMismatch, "matmul_tn: inner dims differ");
  Matrix c(a.cols(), b.cols());
  simd::gemm_tn(a.data(), b.data(), c.data(), a.cols(), a.rows(), b.cols());
  return c;
}

}  // namespace hz
