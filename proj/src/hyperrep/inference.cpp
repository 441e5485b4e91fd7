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

#include "hz/hyperrep/inference.hpp"

#include <algorithm>

#include "hz/core/error.hpp"

namespace hz::hyperrep {

std::vector<Chunk> plan_chunks(std::size_t n, std::size_t length, std::size_t halo) {
  require(n >= 1 && length >= 1, ErrorKind::kInvalidArgument, "plan_chunks: empty input");
  if (n <= length) return {Chunk{0, 0, n}};
  require(length > 2 * halo, ErrorKind::kInvalidArgument,
          "plan_chunks: window too short for its halo");
  const std::size_t content = length - 2 * halo;
  std::vector<Chunk> out;
  for (std::size_t s = 0; s < n;) {
    const std::size_t end = std::min(s + content, n);
    const std::size_t start = std::min(s > halo ? s - halo : 0, n - length);
    out.push_back({start, s, end});
    s = end;
  }
  return out;
}

namespace {

enum class Mode { kEmbed, kDecode, kReconstruct };

std::vector<Matrix> RunChunked(const Autoencoder& ae, const std::vector<Matrix>& inputs,
                               InferenceWindow win, std::size_t batch, Mode mode) {
  const std::size_t n = ae.sequence_length();
  const std::size_t in_cols = mode == Mode::kDecode ? ae.config().d_z : ae.config().d_t;
  const std::size_t out_cols = mode == Mode::kEmbed ? ae.config().d_z : ae.config().d_t;
  for (const auto& m : inputs) {
    require(m.rows() == n && m.cols() == in_cols, ErrorKind::kShapeMismatch,
            "inference: sequence shape does not match the autoencoder");
  }
  const std::size_t length = std::min(win.length == 0 ? ae.config().window : win.length, n);
  const auto chunks = plan_chunks(n, length, win.halo);
  std::vector<Position> chunk_pos;
  for (const auto& c : chunks) {
    for (std::size_t i = 0; i < length; ++i) chunk_pos.push_back(ae.positions()[c.window_start + i]);
  }
  std::vector<Matrix> out(inputs.size(), Matrix(n, out_cols));
  batch = std::max<std::size_t>(batch, 1);
  for (std::size_t first = 0; first < inputs.size(); first += batch) {
    const std::size_t count = std::min(batch, inputs.size() - first);
    const std::size_t per_seq = chunks.size() * length;
    Matrix stacked(count * per_seq, in_cols);
    std::vector<Position> pos;
    pos.reserve(count * per_seq);
    for (std::size_t s = 0; s < count; ++s) {
      const Matrix& src = inputs[first + s];
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        std::copy_n(src.data() + chunks[c].window_start * in_cols, length * in_cols,
                    stacked.data() + (s * per_seq + c * length) * in_cols);
      }
      pos.insert(pos.end(), chunk_pos.begin(), chunk_pos.end());
    }
    ad::Tape t(&ae.params());
    ad::Var y;
    switch (mode) {
      case Mode::kEmbed: y = ae.encode(t, stacked, pos, length); break;
      case Mode::kDecode: y = ae.decode(t, t.constant(std::move(stacked)), pos, length); break;
      case Mode::kReconstruct:
        y = ae.decode(t, ae.encode(t, stacked, pos, length), pos, length);
        break;
    }
    const Matrix& yv = t.value(y);
    for (std::size_t s = 0; s < count; ++s) {
      Matrix& dst = out[first + s];
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        const Chunk& ch = chunks[c];
        const std::size_t row0 = s * per_seq + c * length + (ch.content_start - ch.window_start);
        std::copy_n(yv.data() + row0 * out_cols, (ch.content_end - ch.content_start) * out_cols,
                    dst.data() + ch.content_start * out_cols);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Matrix> embed_sequences(const Autoencoder& ae, const std::vector<Matrix>& tokens,
                                    InferenceWindow win, std::size_t batch) {
  return RunChunked(ae, tokens, win, batch, Mode::kEmbed);
}

std::vector<Matrix> decode_sequences(const Autoencoder& ae, const std::vector<Matrix>& latents,
                                     InferenceWindow win, std::size_t batch) {
  return RunChunked(ae, latents, win, batch, Mode::kDecode);
}

std::vector<Matrix> reconstruct_sequences(const Autoencoder& ae,
                                          const std::vector<Matrix>& tokens,
                                          InferenceWindow win, std::size_t batch) {
  return RunChunked(ae, tokens, win, batch, Mode::kReconstruct);
}

std::vector<double> aggregate(const Matrix& z) {
  require(z.rows() >= 1, ErrorKind::kInvalidArgument, "aggregate: empty sequence");
  std::vector<double> mean(z.cols(), 0.0);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t c = 0; c < z.cols(); ++c) mean[c] += z(r, c);
  }
  for (double& v : mean) v /= static_cast<double>(z.rows());
  return mean;
}

}  // namespace hz::hyperrep
