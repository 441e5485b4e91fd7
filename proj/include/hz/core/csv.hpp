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
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hz {

// FNV-1a of a resolved config dump, printed in CSV headers.
std::uint64_t config_hash(std::string_view resolved_config);
std::string hex64(std::uint64_t v);

// Decimal output with 6 significant digits.
std::string format_number(double v);

// CSV with a single '#' comment line carrying the config hash.
class CsvWriter {
 public:
  using Cell = std::variant<std::string, double, long long>;

  CsvWriter(std::ostream& out, std::uint64_t config_hash, std::vector<std::string> columns);

  void row(const std::vector<Cell>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace hz
