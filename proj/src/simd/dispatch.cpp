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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hz/simd/kernels.hpp"

namespace hz::simd {

#ifndef HZ_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

bool CpuHasAvx2() {
#if defined(HZ_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa InitialIsa() {
  if (const char* env = std::getenv("HZ_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && CpuHasAvx2()) return Isa::kAvx2;
  }
  return CpuHasAvx2() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<const KernelTable*>& ActiveTable() {
  static std::atomic<const KernelTable*> table{
      InitialIsa() == Isa::kAvx2 ? avx2_kernels() : &scalar_kernels()};
  return table;
}

}  // namespace

bool isa_available(Isa isa) {
  return isa == Isa::kScalar || (isa == Isa::kAvx2 && CpuHasAvx2());
}

Isa active_isa() {
  return ActiveTable().load() == &scalar_kernels() ? Isa::kScalar : Isa::kAvx2;
}

void set_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("simd: ISA not available: " +
                                std::string(isa_name(isa)));
  }
  ActiveTable().store(isa == Isa::kAvx2 ? avx2_kernels() : &scalar_kernels());
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

const KernelTable& active() { return *ActiveTable().load(); }

}  // namespace hz::simd
