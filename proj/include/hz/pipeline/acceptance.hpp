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
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "hz/hyperrep/hyperrep.hpp"
#include "hz/zoo/zoo.hpp"

namespace hz::pipeline {

// Knobs of the end-to-end check. Every zoo, model and sample is derived from
// `seed`, so two runs with one config agree bit for bit.
struct AcceptanceConfig {
  std::uint64_t seed = 7;
  std::size_t parallelism = 1;
  std::size_t main_zoo_models = 100;
  std::size_t zoo_epochs = 25;
  std::size_t ae_epochs = 15;
  double ae_learning_rate = 1e-3;
  std::size_t sampling_seeds = 5;
  std::size_t bootstrap_seeds = 10;
  std::size_t candidates = 50;  // k
  std::size_t keep = 5;         // m
  bool check_determinism = true;

  void validate() const;
  nlohmann::json to_json() const;
  static AcceptanceConfig from_json(const nlohmann::json& j);
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  // Named measurements in the order they were taken.
  std::vector<std::pair<std::string, double>> values;
  std::string detail;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_pass() const;
  const CriterionResult* find(int id) const;
  nlohmann::json to_json() const;
};

// Heavy intermediate products, handed out so callers can run further checks
// without retraining.
struct AcceptanceArtifacts {
  zoo::Zoo main_zoo;
  hyperrep::PretrainResult pretrain;
};

using Progress = std::function<void(const CriterionResult&)>;

// Runs criteria 1-13 and, when config.check_determinism is set, reruns them
// and appends criterion 14 (every value reproduced bit-exactly). `progress`
// fires once per criterion of the first pass.
AcceptanceReport run_acceptance(const AcceptanceConfig& config, const Progress& progress = {},
                                AcceptanceArtifacts* artifacts = nullptr);

// True when both reports carry the same criteria, verdicts and bit-identical
// values.
bool identical(const AcceptanceReport& a, const AcceptanceReport& b);

// One row per measurement: criterion, name, value, verdict.
void write_report_csv(const AcceptanceReport& report, std::ostream& out, std::uint64_t config_hash);

// "PASS  3 equivalent-network count (count=120)".
std::string summary_line(const CriterionResult& c);

// Relative l2 error of composite-loss gradients against central differences
// on a toy autoencoder (depth 2, d_model 8).
double autoencoder_gradient_error(std::uint64_t seed);

}  // namespace hz::pipeline
