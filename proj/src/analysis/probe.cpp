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

#include "hz/analysis/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>

#include "hz/analysis/weight_features.hpp"
#include "hz/core/csv.hpp"
#include "hz/core/error.hpp"

namespace hz::analysis {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> View(const Matrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

// Number of tied pairs among runs of equal values in a sorted sequence.
template <typename Eq>
long long TiedPairs(std::size_t n, Eq equal) {
  long long pairs = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      pairs += static_cast<long long>(run) * static_cast<long long>(run - 1) / 2;
      run = 1;
    }
  }
  return pairs;
}

// Sorts v in place and returns the number of inversions.
long long CountInversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                          std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = CountInversions(v, buf, lo, mid) + CountInversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

Matrix SelectRows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

std::vector<double> LinearProbe::predict(const Matrix& x) const {
  require(x.cols() == coefficients.size(), ErrorKind::kShapeMismatch,
          "probe: feature width mismatch");
  std::vector<double> out(x.rows(), intercept);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out[r] += x(r, c) * coefficients[c];
  }
  return out;
}

LinearProbe fit_probe(const Matrix& x, std::span<const double> y, double ridge) {
  require(x.rows() >= 2, ErrorKind::kInvalidArgument, "fit_probe: need at least 2 rows");
  require(x.rows() == y.size(), ErrorKind::kShapeMismatch, "fit_probe: rows and targets differ");
  require(ridge >= 0.0 && std::isfinite(ridge), ErrorKind::kInvalidArgument,
          "fit_probe: ridge must be finite and >= 0");
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  const Eigen::RowVectorXd x_mean = View(x).colwise().mean();
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const double y_mean = yv.mean();
  const Eigen::MatrixXd xc = View(x).rowwise() - x_mean;
  const Eigen::VectorXd yc = yv.array() - y_mean;
  Eigen::VectorXd r;
  if (ridge > 0.0) {
    Eigen::MatrixXd gram = xc.transpose() * xc;
    gram.diagonal().array() += ridge;
    r = gram.ldlt().solve(xc.transpose() * yc);
  } else {
    r = xc.completeOrthogonalDecomposition().solve(yc);
  }
  LinearProbe probe;
  probe.ridge = ridge;
  probe.coefficients.assign(r.data(), r.data() + d);
  probe.intercept = y_mean - x_mean.dot(r);
  return probe;
}

R2 r2_score(std::span<const double> truth, std::span<const double> pred) {
  require(truth.size() == pred.size() && !truth.empty(), ErrorKind::kInvalidArgument,
          "r2_score: size mismatch or empty");
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sse += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    sst += (truth[i] - mean) * (truth[i] - mean);
  }
  if (sst == 0.0) return {0.0, true};
  return {1.0 - sse / sst, false};
}

double kendall_tau(std::span<const double> pred, std::span<const double> truth) {
  require(pred.size() == truth.size(), ErrorKind::kInvalidArgument, "kendall_tau: size mismatch");
  const std::size_t n = pred.size();
  if (n < 2) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pred[a] != pred[b] ? pred[a] < pred[b] : truth[a] < truth[b];
  });
  const long long ties_x = TiedPairs(n, [&](auto i, auto j) { return pred[order[i]] == pred[order[j]]; });
  const long long ties_xy = TiedPairs(n, [&](auto i, auto j) {
    return pred[order[i]] == pred[order[j]] && truth[order[i]] == truth[order[j]];
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = truth[order[i]];
  std::vector<double> buf(n);
  const long long discordant = CountInversions(ys, buf, 0, n);  // leaves ys sorted
  const long long ties_y = TiedPairs(n, [&](auto i, auto j) { return ys[i] == ys[j]; });
  const long long total = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const double denom = std::sqrt(static_cast<double>(total - ties_x) * static_cast<double>(total - ties_y));
  if (denom == 0.0) return 0.0;
  const long long concordant_minus_discordant = total - ties_x - ties_y + ties_xy - 2 * discordant;
  return static_cast<double>(concordant_minus_discordant) / denom;
}

ProbeResult evaluate_probe(const Matrix& x_train, std::span<const double> y_train,
                           const Matrix& x_test, std::span<const double> y_test, double ridge) {
  ProbeResult out;
  out.probe = fit_probe(x_train, y_train, ridge);
  out.train_r2 = r2_score(y_train, out.probe.predict(x_train));
  const auto pred = out.probe.predict(x_test);
  out.test_r2 = r2_score(y_test, pred);
  out.test_tau = kendall_tau(pred, y_test);
  return out;
}

CategoricalResult fit_categorical_probe(const Matrix& x_train, std::span<const int> y_train,
                                        const Matrix& x_test, std::span<const int> y_test,
                                        std::size_t num_classes, const CategoricalOptions& options) {
  require(x_train.rows() == y_train.size() && x_test.rows() == y_test.size() &&
              x_train.cols() == x_test.cols() && x_train.rows() > 0,
          ErrorKind::kShapeMismatch, "fit_categorical_probe: inconsistent inputs");
  require(num_classes >= 1, ErrorKind::kInvalidArgument, "fit_categorical_probe: no classes");
  for (int y : y_train) {
    require(y >= 0 && static_cast<std::size_t>(y) < num_classes, ErrorKind::kInvalidArgument,
            "fit_categorical_probe: label out of range");
  }
  const auto k = static_cast<Eigen::Index>(num_classes);
  const Eigen::RowVectorXd mean = View(x_train).colwise().mean();
  Eigen::RowVectorXd sd =
      ((View(x_train).rowwise() - mean).array().square().colwise().mean()).sqrt().matrix();
  for (Eigen::Index c = 0; c < sd.size(); ++c) {
    if (!(sd[c] > 1e-12)) sd[c] = 1.0;
  }
  auto standardize = [&](const Matrix& x) -> Eigen::MatrixXd {
    return ((View(x).rowwise() - mean).array().rowwise() / sd.array()).matrix();
  };
  const Eigen::MatrixXd xs = standardize(x_train);
  const auto n = xs.rows();
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, y_train[static_cast<std::size_t>(i)]) = 1.0;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(xs.cols(), k);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(k);
  auto softmax = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd logits = (x * w).rowwise() + b;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double mx = logits.row(i).maxCoeff();
      logits.row(i) = (logits.row(i).array() - mx).exp().matrix();
      logits.row(i) /= logits.row(i).sum();
    }
    return logits;
  };
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const Eigen::MatrixXd grad = (softmax(xs) - onehot) / static_cast<double>(n);
    w -= options.lr * (xs.transpose() * grad + options.l2 * w);
    b -= options.lr * grad.colwise().sum();
  }
  auto accuracy = [&](const Eigen::MatrixXd& x, std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    const Eigen::MatrixXd p = (x * w).rowwise() + b;
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      Eigen::Index arg = 0;
      p.row(i).maxCoeff(&arg);
      correct += arg == labels[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
  };
  return {accuracy(xs, y_train), accuracy(standardize(x_test), y_test)};
}

std::vector<ProbeSample> probe_samples(const zoo::Zoo& z, std::size_t epoch_stride) {
  require(epoch_stride >= 1, ErrorKind::kInvalidArgument, "probe_samples: stride must be >= 1");
  std::vector<ProbeSample> out;
  for (std::size_t m = 0; m < z.models.size(); ++m) {
    const auto& t = z.models[m];
    for (const auto& c : t.checkpoints) {
      if (!c.viable || c.epoch % epoch_stride != 0) continue;
      ProbeSample s;
      s.model_index = m;
      s.epoch = c.epoch;
      s.split = t.split;
      s.acc = c.metrics.test_acc;
      s.eph = static_cast<double>(c.epoch);
      s.ggap = c.metrics.train_acc - c.metrics.test_acc;
      s.activation = static_cast<int>(t.config.activation);
      s.init = static_cast<int>(t.config.init);
      out.push_back(s);
    }
  }
  return out;
}

Matrix feature_matrix(const zoo::Zoo& z, std::span<const ProbeSample> samples,
                      const FeatureFn& features) {
  Matrix out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& t = z.models[samples[i].model_index];
    const auto f = features(t.checkpoints[samples[i].epoch].weights);
    if (i == 0) out = Matrix(samples.size(), f.size());
    require(f.size() == out.cols(), ErrorKind::kShapeMismatch, "feature_matrix: ragged features");
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

FeatureFn raw_weight_features() {
  return [](const nn::ModelWeights& w) { return w.flatten(); };
}

FeatureFn stat_features() {
  return [](const nn::ModelWeights& w) { return weight_stats(w).features(); };
}

std::vector<ProbeRow> probe_suite(const zoo::Zoo& z, const std::string& feature_name,
                                  const Matrix& features, std::span<const ProbeSample> samples,
                                  const ProbeSuiteOptions& options) {
  require(features.rows() == samples.size(), ErrorKind::kShapeMismatch,
          "probe_suite: one feature row per sample required");
  (void)z;
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == zoo::Split::kTrain) train.push_back(i);
    if (samples[i].split == zoo::Split::kTest) test.push_back(i);
  }
  require(train.size() >= 2 && !test.empty(), ErrorKind::kDegenerate,
          "probe_suite: need >= 2 train and >= 1 test samples");
  const Matrix x_train = SelectRows(features, train);
  const Matrix x_test = SelectRows(features, test);
  std::vector<ProbeRow> rows;
  auto regress = [&](const char* name, double ProbeSample::*field) {
    std::vector<double> ytr, yte;
    for (std::size_t i : train) ytr.push_back(samples[i].*field);
    for (std::size_t i : test) yte.push_back(samples[i].*field);
    const auto r = evaluate_probe(x_train, ytr, x_test, yte, options.ridge);
    rows.push_back({feature_name, name, train.size(), test.size(), r.train_r2.value, r.test_r2.value,
                    r.test_tau, r.test_r2.degenerate || r.train_r2.degenerate, std::nullopt});
  };
  regress("acc", &ProbeSample::acc);
  regress("eph", &ProbeSample::eph);
  regress("ggap", &ProbeSample::ggap);
  if (options.categorical) {
    auto classify = [&](const char* name, int ProbeSample::*field, std::size_t classes) {
      std::vector<int> ytr, yte;
      for (std::size_t i : train) ytr.push_back(samples[i].*field);
      for (std::size_t i : test) yte.push_back(samples[i].*field);
      const auto r = fit_categorical_probe(x_train, ytr, x_test, yte, classes, options.categorical_options);
      ProbeRow row{feature_name, name, train.size(), test.size(), 0.0, 0.0, 0.0, false, r.test_accuracy};
      rows.push_back(row);
    };
    classify("activation", &ProbeSample::activation, 4);
    classify("init", &ProbeSample::init, 6);
  }
  return rows;
}

std::vector<ProbeRow> probe_suite(const zoo::Zoo& z, const std::string& feature_name,
                                  const FeatureFn& features, const ProbeSuiteOptions& options) {
  const auto samples = probe_samples(z, options.epoch_stride);
  return probe_suite(z, feature_name, feature_matrix(z, samples, features), samples, options);
}

void write_probe_csv(std::span<const ProbeRow> rows, std::ostream& out, std::uint64_t config_hash) {
  CsvWriter csv(out, config_hash,
                {"feature", "target", "n_train", "n_test", "train_r2", "test_r2", "kendall_tau",
                 "test_accuracy", "degenerate"});
  for (const auto& r : rows) {
    const bool cat = r.test_accuracy.has_value();
    csv.row({r.feature, r.target, static_cast<long long>(r.n_train), static_cast<long long>(r.n_test),
             cat ? CsvWriter::Cell(std::string()) : CsvWriter::Cell(r.train_r2),
             cat ? CsvWriter::Cell(std::string()) : CsvWriter::Cell(r.test_r2),
             cat ? CsvWriter::Cell(std::string()) : CsvWriter::Cell(r.test_tau),
             cat ? CsvWriter::Cell(*r.test_accuracy) : CsvWriter::Cell(std::string()),
             static_cast<long long>(r.degenerate)});
  }
}

}  // namespace hz::analysis
