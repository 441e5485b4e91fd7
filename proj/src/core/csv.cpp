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

#include "hz/core/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"

namespace hz {

std::uint64_t config_hash(std::string_view resolved_config) { return hash_tag(resolved_config); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, std::uint64_t hash, std::vector<std::string> columns)
    : out_(out), columns_(columns.size()) {
  out_ << "# config_hash=" << hex64(hash) << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  require(cells.size() == columns_, ErrorKind::kShapeMismatch, "csv: wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ",";
    if (const auto* s = std::get_if<std::string>(&cells[i])) out_ << *s;
    else if (const auto* d = std::get_if<double>(&cells[i])) out_ << format_number(*d);
    else out_ << std::get<long long>(cells[i]);
  }
  out_ << "\n";
}

}  // namespace hz
