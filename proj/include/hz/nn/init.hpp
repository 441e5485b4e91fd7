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

#include <cstdint>
#include <string_view>

#include "hz/nn/architecture.hpp"
#include "hz/nn/weights.hpp"

namespace hz::nn {

enum class InitMethod {
  kUniform,
  kNormal,
  kKaimingUniform,
  kKaimingNormal,
  kXavierUniform,
  kXavierNormal,
};

std::string_view to_string(InitMethod m);
InitMethod parse_init_method(std::string_view name);

// Weight scale conventions (fan_in/fan_out of each layer):
//   uniform         U(-1/sqrt(fan_in), 1/sqrt(fan_in))
//   normal          N(0, 1/fan_in)
//   kaiming_uniform U(-sqrt(6/fan_in), sqrt(6/fan_in))
//   kaiming_normal  N(0, 2/fan_in)
//   xavier_uniform  U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out)))
//   xavier_normal   N(0, 2/(fan_in+fan_out))
// Biases start at zero.
ModelWeights init_weights(const Architecture& arch, InitMethod method, std::uint64_t seed);

}  // namespace hz::nn
