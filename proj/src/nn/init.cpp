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

#include "hz/nn/init.hpp"

#include <cmath>
#include <string>

#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"

namespace hz::nn {

std::string_view to_string(InitMethod m) {
  switch (m) {
    case InitMethod::kUniform: return "uniform";
    case InitMethod::kNormal: return "normal";
    case InitMethod::kKaimingUniform: return "kaiming_uniform";
    case InitMethod::kKaimingNormal: return "kaiming_normal";
    case InitMethod::kXavierUniform: return "xavier_uniform";
    case InitMethod::kXavierNormal: return "xavier_normal";
  }
  return "?";
}

InitMethod parse_init_method(std::string_view name) {
  for (InitMethod m : {InitMethod::kUniform, InitMethod::kNormal, InitMethod::kKaimingUniform,
                       InitMethod::kKaimingNormal, InitMethod::kXavierUniform,
                       InitMethod::kXavierNormal}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kParse, "unknown init method: " + std::string(name));
}

ModelWeights init_weights(const Architecture& arch, InitMethod method, std::uint64_t seed) {
  arch.validate();
  ModelWeights w(arch);
  Rng rng(derive_seed(seed, "init"));
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const double fan_in = static_cast<double>(arch.layers[l].in_dim);
    const double fan_out = static_cast<double>(arch.layers[l].out_dim);
    bool uniform = true;
    double scale = 0.0;  // bound for uniform, stddev for normal
    switch (method) {
      case InitMethod::kUniform: scale = 1.0 / std::sqrt(fan_in); break;
      case InitMethod::kNormal: uniform = false; scale = 1.0 / std::sqrt(fan_in); break;
      case InitMethod::kKaimingUniform: scale = std::sqrt(6.0 / fan_in); break;
      case InitMethod::kKaimingNormal: uniform = false; scale = std::sqrt(2.0 / fan_in); break;
      case InitMethod::kXavierUniform: scale = std::sqrt(6.0 / (fan_in + fan_out)); break;
      case InitMethod::kXavierNormal:
        uniform = false;
        scale = std::sqrt(2.0 / (fan_in + fan_out));
        break;
    }
    for (double& v : w.weight(l)) {
      v = uniform ? scale * (2.0 * uniform01(rng) - 1.0) : scale * standard_normal(rng);
    }
  }
  return w;
}

}  // namespace hz::nn
