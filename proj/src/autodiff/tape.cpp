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

#include "hz/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>

#include "hz/core/error.hpp"
#include "hz/simd/kernels.hpp"

namespace hz::ad {
namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

void AddInto(Matrix& dst, const Matrix& src, double scale = 1.0) {
  simd::axpy(scale, src.data(), dst.data(), src.size());
}

void RequireShape(const Matrix& a, std::size_t rows, std::size_t cols, const char* op) {
  require(a.rows() == rows && a.cols() == cols, ErrorKind::kShapeMismatch,
          std::string(op) + ": shape mismatch");
}

}  // namespace

Var Tape::push(Matrix value, std::function<void()> backward) {
  nodes_.push_back({std::move(value), Matrix(), std::move(backward), std::nullopt});
  return {nodes_.size() - 1};
}

Var Tape::constant(Matrix value) { return push(std::move(value)); }

Var Tape::param(std::size_t index) {
  require(read_ != nullptr && index < read_->count(), ErrorKind::kInvalidArgument,
          "tape: unknown parameter");
  Var out = push(read_->value(index));
  nodes_[out.id].param = index;
  return out;
}

void Tape::backward(Var out) {
  RequireShape(v(out.id), 1, 1, "backward");
  for (auto& n : nodes_) n.grad = Matrix(n.value.rows(), n.value.cols());
  g(out.id)(0, 0) = 1.0;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward();
  }
  for (auto& n : nodes_) {
    if (n.param) {
      require(params_ != nullptr, ErrorKind::kInvalidArgument,
              "tape: backward through a read-only parameter store");
      auto dst = params_->grads(*n.param);
      simd::axpy(1.0, n.grad.data(), dst.data(), dst.size());
    }
  }
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& av = v(a.id);
  const Matrix& bv = v(b.id);
  require(av.cols() == bv.rows(), ErrorKind::kShapeMismatch, "matmul: inner dimensions differ");
  Matrix out(av.rows(), bv.cols());
  simd::gemm_nn(av.data(), bv.data(), out.data(), av.rows(), av.cols(), bv.cols());
  Var o = push(std::move(out));
  nodes_[o.id].backward = [this, a, b, o] {
    const Matrix& go = g(o.id);
    const Matrix& av = v(a.id);
    const Matrix& bv = v(b.id);
    simd::gemm_nt(go.data(), bv.data(), g(a.id).data(), av.rows(), go.cols(), av.cols(), true);
    simd::gemm_tn(av.data(), go.data(), g(b.id).data(), bv.rows(), av.rows(), bv.cols(), true);
  };
  return o;
}

Var Tape::linear(Var x, Var w, Var b) {
  const Matrix& xv = v(x.id);
  const Matrix& wv = v(w.id);
  const Matrix& bv = v(b.id);
  require(xv.cols() == wv.cols(), ErrorKind::kShapeMismatch, "linear: input width mismatch");
  RequireShape(bv, 1, wv.rows(), "linear bias");
  const std::size_t n = xv.rows(), in = wv.cols(), out = wv.rows();
  Matrix y(n, out);
  for (std::size_t r = 0; r < n; ++r) std::copy(bv.data(), bv.data() + out, y.row(r).begin());
  simd::gemm_nt(xv.data(), wv.data(), y.data(), n, in, out, true);
  Var o = push(std::move(y));
  nodes_[o.id].backward = [this, x, w, b, o, n, in, out] {
    const Matrix& go = g(o.id);
    simd::gemm_nn(go.data(), v(w.id).data(), g(x.id).data(), n, out, in, true);
    simd::gemm_tn(go.data(), v(x.id).data(), g(w.id).data(), out, n, in, true);
    Matrix& gb = g(b.id);
    for (std::size_t r = 0; r < n; ++r) simd::axpy(1.0, go.row(r).data(), gb.data(), out);
  };
  return o;
}

Var Tape::add(Var a, Var b) { return weighted_sum(a, 1.0, b, 1.0); }

Var Tape::weighted_sum(Var a, double wa, Var b, double wb) {
  const Matrix& av = v(a.id);
  RequireShape(v(b.id), av.rows(), av.cols(), "weighted_sum");
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values()[i] = wa * av.values()[i] + wb * v(b.id).values()[i];
  }
  Var o = push(std::move(out));
  nodes_[o.id].backward = [this, a, b, o, wa, wb] {
    AddInto(g(a.id), g(o.id), wa);
    AddInto(g(b.id), g(o.id), wb);
  };
  return o;
}

Var Tape::gelu(Var a) {
  Matrix out = v(a.id);
  for (double& x : out.values()) {
    x = 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
  }
  Var o = push(std::move(out));
  nodes_[o.id].backward = [this, a, o] {
    const auto& xs = v(a.id).values();
    const auto& go = g(o.id).values();
    auto& ga = g(a.id).values();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
      const double dt = (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
      ga[i] += go[i] * (0.5 * (1.0 + t) + 0.5 * x * dt);
    }
  };
  return o;
}

Var Tape::relu(Var a) {
  Matrix out = v(a.id);
  for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
  Var o = push(std::move(out));
  nodes_[o.id].backward = [this, a, o] {
    const auto& xs = v(a.id).values();
    const auto& go = g(o.id).values();
    auto& ga = g(a.id).values();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] > 0.0) ga[i] += go[i];
    }
  };
  return o;
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Matrix& xv = v(x.id);
  const std::size_t n = xv.rows(), d = xv.cols();
  RequireShape(v(gamma.id), 1, d, "layer_norm gamma");
  RequireShape(v(beta.id), 1, d, "layer_norm beta");
  Matrix xhat(n, d);
  std::vector<double> inv_std(n);
  Matrix out(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (double e : xv.row(r)) mean += e;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double e : xv.row(r)) var += (e - mean) * (e - mean);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      xhat(r, c) = (xv(r, c) - mean) * inv_std[r];
      out(r, c) = v(gamma.id)(0, c) * xhat(r, c) + v(beta.id)(0, c);
    }
  }
  Var o = push(std::move(out));
  nodes_[o.id].backward = [this, x, gamma, beta, o, n, d, xhat = std::move(xhat),
                           inv_std = std::move(inv_std)] {
    const Matrix& go = g(o.id);
    const Matrix& gv = v(gamma.id);
    Matrix& gx = g(x.id);
    Matrix& gg = g(gamma.id);
    Matrix& gbeta = g(beta.id);
    std::vector<double> dxhat(d);
    for (std::size_t r = 0; r < n; ++r) {
      double mean_d = 0.0, mean_dx = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        gg(0, c) += go(r, c) * xhat(r, c);
        gbeta(0, c) += go(r, c);
        dxhat[c] = go(r, c) * gv(0, c);
        mean_d += dxhat[c];
        mean_dx += dxhat[c] * xhat(r, c);
      }
      mean_d /= static_cast<double>(d);
      mean_dx /= static_cast<double>(d);
      for (std::size_t c = 0; c < d; ++c) {
        gx(r, c) += inv_std[r] * (dxhat[c] - mean_d - xhat(r, c) * mean_dx);
      }
    }
  };
  return o;
}

Var Tape::gather_rows(Var table, std::vector<std::size_t> rows) {
  const Matrix& tv = v(table.id);
  Matrix out(rows.size(), tv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < tv.rows(), ErrorKind::kInvalidArgument, "gather_rows: index out of range");
    std::copy(tv.row(rows[i]).begin(), tv.row(rows[i]).end(), out.row(i).begin());
  }
  Var o = push(std::move(out));
  nodes_[o.id].backward = [this, table, o, rows = std::move(rows)] {
    const Matrix& go = g(o.id);
    Matrix& gt = g(table.id);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      simd::axpy(1.0, go.row(i).data(), gt.row(rows[i]).data(), go.cols());
    }
  };
  return o;
}

Var Tape::reshape(Var a, std::size_t rows, std::size_t cols) {
  const Matrix& av = v(a.id);
  require(rows * cols == av.size(), ErrorKind::kShapeMismatch, "reshape: size mismatch");
  Var o = push(Matrix(rows, cols, av.values()));
  nodes_[o.id].backward = [this, a, o] { AddInto(g(a.id), g(o.id)); };
  return o;
}

Var Tape::attention(Var q, Var k, Var vv, std::size_t heads, std::size_t seq_len) {
  const Matrix& qv = v(q.id);
  const std::size_t rows = qv.rows(), d = qv.cols();
  RequireShape(v(k.id), rows, d, "attention k");
  RequireShape(v(vv.id), rows, d, "attention v");
  require(heads >= 1 && d % heads == 0 && seq_len >= 1 && rows % seq_len == 0,
          ErrorKind::kShapeMismatch, "attention: heads must divide width, seq_len must divide rows");
  const std::size_t blocks = rows / seq_len, dh = d / heads, L = seq_len;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> probs(blocks * heads * L * L);
  Matrix out(rows, d);
  const Matrix& kv = v(k.id);
  const Matrix& vm = v(vv.id);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      double* p = probs.data() + (b * heads + h) * L * L;
      for (std::size_t i = 0; i < L; ++i) {
        const double* qi = qv.row(b * L + i).data() + h * dh;
        double mx = -1e300;
        for (std::size_t j = 0; j < L; ++j) {
          const double* kj = kv.row(b * L + j).data() + h * dh;
          double s = 0.0;
          for (std::size_t e = 0; e < dh; ++e) s += qi[e] * kj[e];
          p[i * L + j] = s * scale;
          mx = std::max(mx, p[i * L + j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < L; ++j) {
          p[i * L + j] = std::exp(p[i * L + j] - mx);
          sum += p[i * L + j];
        }
        double* oi = out.row(b * L + i).data() + h * dh;
        for (std::size_t j = 0; j < L; ++j) {
          p[i * L + j] /= sum;
          const double* vj = vm.row(b * L + j).data() + h * dh;
          for (std::size_t e = 0; e < dh; ++e) oi[e] += p[i * L + j] * vj[e];
        }
      }
    }
  }
  Var o = push(std::move(out));
  nodes_[o.id].backward = [this, q, k, vv, o, blocks, heads, dh, L, scale,
                           probs = std::move(probs)] {
    const Matrix& go = g(o.id);
    const Matrix& qv = v(q.id);
    const Matrix& kv = v(k.id);
    const Matrix& vm = v(vv.id);
    Matrix& gq = g(q.id);
    Matrix& gk = g(k.id);
    Matrix& gv = g(vv.id);
    std::vector<double> dp(L * L);
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t h = 0; h < heads; ++h) {
        const double* p = probs.data() + (b * heads + h) * L * L;
        for (std::size_t i = 0; i < L; ++i) {
          const double* goi = go.row(b * L + i).data() + h * dh;
          for (std::size_t j = 0; j < L; ++j) {
            const double* vj = vm.row(b * L + j).data() + h * dh;
            double* gvj = gv.row(b * L + j).data() + h * dh;
            double s = 0.0;
            for (std::size_t e = 0; e < dh; ++e) {
              s += goi[e] * vj[e];
              gvj[e] += p[i * L + j] * goi[e];
            }
            dp[i * L + j] = s;
          }
          double dot = 0.0;
          for (std::size_t j = 0; j < L; ++j) dot += dp[i * L + j] * p[i * L + j];
          const double* qi = qv.row(b * L + i).data() + h * dh;
          double* gqi = gq.row(b * L + i).data() + h * dh;
          for (std::size_t j = 0; j < L; ++j) {
            const double ds = p[i * L + j] * (dp[i * L + j] - dot) * scale;
            const double* kj = kv.row(b * L + j).data() + h * dh;
            double* gkj = gk.row(b * L + j).data() + h * dh;
            for (std::size_t e = 0; e < dh; ++e) {
              gqi[e] += ds * kj[e];
              gkj[e] += ds * qi[e];
            }
          }
        }
      }
    }
  };
  return o;
}

Var Tape::masked_mse(Var pred, const Matrix& target, const Matrix& mask) {
  const Matrix& pv = v(pred.id);
  RequireShape(target, pv.rows(), pv.cols(), "masked_mse target");
  RequireShape(mask, pv.rows(), pv.cols(), "masked_mse mask");
  double count = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double m = mask.values()[i];
    const double diff = pv.values()[i] - target.values()[i];
    count += m;
    sum += m * diff * diff;
  }
  const double inv = count > 0.0 ? 1.0 / count : 0.0;
  Var o = push(Matrix(1, 1, sum * inv));
  nodes_[o.id].backward = [this, pred, o, target, mask, inv] {
    const double go = g(o.id)(0, 0);
    const auto& pv = v(pred.id).values();
    auto& gp = g(pred.id).values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      gp[i] += go * 2.0 * mask.values()[i] * (pv[i] - target.values()[i]) * inv;
    }
  };
  return o;
}

Var Tape::nt_xent(Var a, Var b, double temperature) {
  const Matrix& av = v(a.id);
  RequireShape(v(b.id), av.rows(), av.cols(), "nt_xent");
  require(temperature > 0.0, ErrorKind::kInvalidArgument, "nt_xent: temperature must be > 0");
  const std::size_t half = av.rows(), n = 2 * half, d = av.cols();
  require(half >= 1, ErrorKind::kInvalidArgument, "nt_xent: empty batch");
  Matrix u(n, d);
  std::vector<double> norms(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto src = r < half ? av.row(r) : v(b.id).row(r - half);
    double s = 0.0;
    for (double x : src) s += x * x;
    norms[r] = std::max(std::sqrt(s), 1e-12);
    for (std::size_t c = 0; c < d; ++c) u(r, c) = src[c] / norms[r];
  }
  Matrix sim(n, n);
  simd::gemm_nt(u.data(), u.data(), sim.data(), n, d, n);
  for (double& s : sim.values()) s /= temperature;
  // Softmax over c != i for each anchor i.
  Matrix soft(n, n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = (i + half) % n;
    double mx = -1e300;
    for (std::size_t c = 0; c < n; ++c) {
      if (c != i) mx = std::max(mx, sim(i, c));
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (c != i) sum += std::exp(sim(i, c) - mx);
    }
    for (std::size_t c = 0; c < n; ++c) {
      soft(i, c) = c == i ? 0.0 : std::exp(sim(i, c) - mx) / sum;
    }
    loss += -(sim(i, pos) - mx) + std::log(sum);
  }
  loss /= static_cast<double>(n);
  Var o = push(Matrix(1, 1, loss));
  nodes_[o.id].backward = [this, a, b, o, half, n, d, temperature, u = std::move(u),
                           norms = std::move(norms), soft = std::move(soft)] {
    const double go = g(o.id)(0, 0);
    Matrix ds(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pos = (i + half) % n;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == i) continue;
        ds(i, c) = go * (soft(i, c) - (c == pos ? 1.0 : 0.0)) / static_cast<double>(n);
      }
    }
    Matrix sym(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < n; ++c) sym(i, c) = (ds(i, c) + ds(c, i)) / temperature;
    }
    Matrix du(n, d);
    simd::gemm_nn(sym.data(), u.data(), du.data(), n, n, d);
    for (std::size_t r = 0; r < n; ++r) {
      double proj = 0.0;
      for (std::size_t c = 0; c < d; ++c) proj += u(r, c) * du(r, c);
      auto dst = r < half ? g(a.id).row(r) : g(b.id).row(r - half);
      for (std::size_t c = 0; c < d; ++c) dst[c] += (du(r, c) - u(r, c) * proj) / norms[r];
    }
  };
  return o;
}

}  // namespace hz::ad
