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
#include <vector>

#include "hz/core/matrix.hpp"
#include "hz/hyperrep/autoencoder.hpp"

namespace hz::hyperrep {

// Inference windows of `length` tokens (0 = the training window) carry
// `halo` context tokens on each side; only the middle length - 2 * halo
// content tokens are kept.
struct InferenceWindow {
  std::size_t length = 0;
  std::size_t halo = 1;
};

struct Chunk {
  std::size_t window_start = 0;
  std::size_t content_start = 0;
  std::size_t content_end = 0;
};

// Consecutive content chunks covering [0, n) exactly once. Windows start
// halo tokens before their content, clamped so they stay inside the
// sequence (flush with either end). When n <= length a single window covers
// everything.
std::vector<Chunk> plan_chunks(std::size_t n, std::size_t length, std::size_t halo);

// All sequences must have ae.sequence_length() rows. Work is batched across
// sequences; `batch` bounds how many are evaluated per tape.
std::vector<Matrix> embed_sequences(const Autoencoder& ae, const std::vector<Matrix>& tokens,
                                    InferenceWindow win = {}, std::size_t batch = 256);
std::vector<Matrix> decode_sequences(const Autoencoder& ae, const std::vector<Matrix>& latents,
                                     InferenceWindow win = {}, std::size_t batch = 256);
// Encode and decode inside each window.
std::vector<Matrix> reconstruct_sequences(const Autoencoder& ae,
                                          const std::vector<Matrix>& tokens,
                                          InferenceWindow win = {}, std::size_t batch = 256);

// Mean over tokens.
std::vector<double> aggregate(const Matrix& z);

}  // namespace hz::hyperrep
