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
#include <string_view>

// Dense double-precision kernels used by the MLP engine and the autoencoder.
// Every kernel has a scalar reference implementation; wider variants are
// selected once at startup from the CPU feature set and can be overridden
// with HZ_SIMD=scalar|avx2 or set_isa().
namespace hz::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
  // C(MxN) = A(MxK) * B(KxN), all row-major. accumulate adds into C.
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate);
  // C(MxN) = A(MxK) * B(NxK)^T
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate);
  // C(MxN) = A(KxM)^T * B(KxN)
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate);
};

const KernelTable& scalar_kernels();
// Returns nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();

bool isa_available(Isa isa);
Isa active_isa();
// Throws std::invalid_argument if the ISA is not available on this CPU.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

const KernelTable& active();

inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline double squared_distance(const double* x, const double* y,
                               std::size_t n) {
  return active().squared_distance(x, y, n);
}
inline void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n, bool accumulate = false) {
  active().gemm_nn(a, b, c, m, k, n, accumulate);
}
inline void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n, bool accumulate = false) {
  active().gemm_nt(a, b, c, m, k, n, accumulate);
}
inline void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n, bool accumulate = false) {
  active().gemm_tn(a, b, c, m, k, n, accumulate);
}

}  // namespace hz::simd
