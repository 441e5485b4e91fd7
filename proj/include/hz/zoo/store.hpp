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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "hz/zoo/zoo.hpp"

namespace hz::zoo {

// On-disk layout:
//   <dir>/index.json              models, configs, splits, per-epoch metrics,
//                                 weight file names and lengths
//   <dir>/weights/m<id>_e<ep>.bin little-endian float32 in flatten() order
void save_zoo(const Zoo& zoo, const std::filesystem::path& dir);
// Throws Error(kIo) for missing files, Error(kParse) for malformed indexes.
Zoo load_zoo(const std::filesystem::path& dir);

void write_f32_le(const std::filesystem::path& file, std::span<const double> values);
std::vector<double> read_f32_le(const std::filesystem::path& file, std::size_t expected);

nlohmann::json to_json(const GeneratingFactors& f);
GeneratingFactors factors_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const symmetry::PermutationSet& p);
symmetry::PermutationSet permutation_from_json(const nlohmann::json& j);

}  // namespace hz::zoo
