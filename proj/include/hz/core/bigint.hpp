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
#include <string>
#include <vector>

namespace hz {

// Non-negative arbitrary-precision integer supporting multiplication by a
// machine word; enough for factorial products.
class BigUnsigned {
 public:
  BigUnsigned(std::uint64_t v = 0) {  // NOLINT(google-explicit-constructor)
    while (v > 0) {
      limbs_.push_back(static_cast<std::uint32_t>(v % kBase));
      v /= kBase;
    }
  }

  BigUnsigned& operator*=(std::uint32_t m) {
    std::uint64_t carry = 0;
    for (auto& limb : limbs_) {
      const std::uint64_t cur = static_cast<std::uint64_t>(limb) * m + carry;
      limb = static_cast<std::uint32_t>(cur % kBase);
      carry = cur / kBase;
    }
    while (carry > 0) {
      limbs_.push_back(static_cast<std::uint32_t>(carry % kBase));
      carry /= kBase;
    }
    if (m == 0) limbs_.clear();
    return *this;
  }

  std::string to_string() const {
    if (limbs_.empty()) return "0";
    std::string out = std::to_string(limbs_.back());
    for (auto it = limbs_.rbegin() + 1; it != limbs_.rend(); ++it) {
      const std::string part = std::to_string(*it);
      out += std::string(9 - part.size(), '0') + part;
    }
    return out;
  }

  friend bool operator==(const BigUnsigned&, const BigUnsigned&) = default;

 private:
  static constexpr std::uint32_t kBase = 1'000'000'000;
  std::vector<std::uint32_t> limbs_;  // little-endian base 1e9
};

}  // namespace hz
