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

#include "hz/pipeline/acceptance.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <utility>

#include "hz/analysis/probe.hpp"
#include "hz/analysis/similarity.hpp"
#include "hz/analysis/weight_features.hpp"
#include "hz/core/csv.hpp"
#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"
#include "hz/nn/init.hpp"
#include "hz/nn/mlp.hpp"
#include "hz/sampler/sampler.hpp"
#include "hz/symmetry/symmetry.hpp"
#include "hz/zoo/diversity.hpp"

namespace hz::pipeline {

namespace {

constexpr std::array<nn::Activation, 4> kActivations{nn::Activation::kTanh, nn::Activation::kRelu,
                                                     nn::Activation::kSigmoid, nn::Activation::kGelu};

CriterionResult Make(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

Matrix NormalInputs(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(rows, cols);
  for (double& v : x.values()) v = standard_normal(rng);
  return x;
}

// At least `fraction` of `total`, rounded up.
bool Enough(std::size_t hits, std::size_t total, double fraction) {
  return static_cast<double>(hits) >= std::ceil(fraction * static_cast<double>(total) - 1e-9);
}

double MeanMetric(const std::vector<nn::ModelWeights>& models, const sampler::MetricFn& metric) {
  double s = 0.0;
  for (const auto& w : models) s += metric(w);
  return s / static_cast<double>(models.size());
}

std::vector<nn::ModelWeights> FinalWeights(const zoo::Zoo& z, zoo::Split split) {
  std::vector<nn::ModelWeights> out;
  for (const auto* t : z.in_split(split))
    if (const auto* c = t->final_viable()) out.push_back(c->weights);
  return out;
}

CriterionResult Forward(const AcceptanceConfig& cfg) {
  CriterionResult r = Make(1, "permutation forward equivalence");
  double worst = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const auto arch = nn::tetris_architecture(kActivations[i % kActivations.size()]);
    const auto w = nn::init_weights(arch, nn::InitMethod::kKaimingUniform, derive_seed(cfg.seed, "c1-net", i));
    const auto p = symmetry::random_permutation_set(arch, derive_seed(cfg.seed, "c1-perm", i));
    const Matrix x = NormalInputs(100, arch.input_dim(), derive_seed(cfg.seed, "c1-x", i));
    worst = std::max(worst, symmetry::max_forward_deviation(w, symmetry::apply_permutation(w, p), arch, x));
  }
  r.values = {{"max_deviation", worst}};
  r.pass = worst < 1e-9;
  return r;
}

CriterionResult Backward(const AcceptanceConfig& cfg) {
  CriterionResult r = Make(2, "permutation backward equivalence");
  double worst = 0.0;
  std::size_t ok = 0;
  for (std::size_t s = 0; s < 10; ++s) {
    const auto arch = nn::tetris_architecture();
    const auto data = data::gen_tetris(20, 0.05, derive_seed(cfg.seed, "c2-data", s));
    const auto w = nn::init_weights(arch, nn::InitMethod::kKaimingUniform, derive_seed(cfg.seed, "c2-net", s));
    const auto p = symmetry::random_permutation_set(arch, derive_seed(cfg.seed, "c2-perm", s));
    symmetry::BackwardCheck check;
    check.steps = 10;
    check.tol = 1e-6;
    check.batch_seed = check.permuted_batch_seed = derive_seed(cfg.seed, "c2-batches", s);
    const auto rep = symmetry::backward_equivalence(w, arch, p, data.samples, data.labels, check);
    worst = std::max(worst, rep.max_deviation);
    ok += rep.equivalent ? 1 : 0;
  }
  r.values = {{"seeds_equivalent", static_cast<double>(ok)}, {"max_deviation", worst}};
  r.pass = ok == 10;
  return r;
}

CriterionResult Count() {
  CriterionResult r = Make(3, "equivalent-network count");
  const auto n = symmetry::count_equivalent(nn::Architecture::from_widths({16, 5, 4}));
  r.values = {{"count", std::stod(n.to_string())}};
  r.pass = n.to_string() == "120";
  return r;
}

CriterionResult AlignOracle(const AcceptanceConfig& cfg) {
  CriterionResult r = Make(4, "alignment oracle");
  std::size_t exact = 0, recovered = 0;
  for (std::size_t s = 0; s < 100; ++s) {
    const std::size_t width = 2 + s % 5;
    const auto arch = nn::Architecture::from_widths({5, width, 3}, nn::Activation::kTanh);
    const auto w = nn::init_weights(arch, nn::InitMethod::kUniform, derive_seed(cfg.seed, "c4-w", s));
    const auto ref = nn::init_weights(arch, nn::InitMethod::kUniform, derive_seed(cfg.seed, "c4-ref", s));
    const double got = symmetry::squared_distance(symmetry::align(w, ref).aligned, ref);
    const double best = symmetry::squared_distance(symmetry::align_exhaustive(w, ref).aligned, ref);
    exact += std::abs(got - best) <= 1e-12 ? 1 : 0;
    const auto p = symmetry::random_permutation_set(arch, derive_seed(cfg.seed, "c4-perm", s));
    recovered += symmetry::align(symmetry::apply_permutation(w, p), w).aligned == w ? 1 : 0;
  }
  r.values = {{"exhaustive_matches", static_cast<double>(exact)},
              {"permuted_copies_recovered", static_cast<double>(recovered)}};
  r.pass = exact == 100 && recovered == 100;
  return r;
}

CriterionResult AlignDistance(const AcceptanceConfig& cfg) {
  CriterionResult r = Make(5, "alignment reduces distance");
  const auto z = zoo::generate_zoo(zoo::seed_config(20, cfg.zoo_epochs, cfg.seed + 1), cfg.parallelism);
  const auto c = symmetry::canonicalize_zoo(z, z.models.front().model_id, cfg.parallelism);
  const double before = zoo::off_diagonal_stats(zoo::weight_distances(zoo::final_models(z)).l2).first;
  const double after = zoo::off_diagonal_stats(zoo::weight_distances(zoo::final_models(c)).l2).first;
  const double reduction = 1.0 - after / before;
  r.values = {{"l2_before", before}, {"l2_after", after}, {"reduction", reduction}};
  r.pass = after < before && reduction >= 0.2;
  return r;
}

CriterionResult Entropy(const AcceptanceConfig& cfg) {
  CriterionResult r = Make(6, "matrix entropy decreases");
  std::size_t hits = 0;
  for (std::size_t rep = 0; rep < 5; ++rep) {
    const auto z = zoo::generate_zoo(zoo::seed_config(50, cfg.zoo_epochs, cfg.seed + 100 + rep), cfg.parallelism);
    const auto e = analysis::entropy_trajectory(z);
    r.values.emplace_back("rep" + std::to_string(rep) + "_epoch0", e.front());
    r.values.emplace_back("rep" + std::to_string(rep) + "_final", e.back());
    hits += e.back() < e.front() ? 1 : 0;
  }
  r.values.emplace_back("reps_decreasing", static_cast<double>(hits));
  r.pass = Enough(hits, 5, 0.9);
  return r;
}

// Criteria 7 and 13 share their zoos.
std::pair<CriterionResult, CriterionResult> CorrelationAndSoup(const AcceptanceConfig& cfg) {
  CriterionResult corr = Make(7, "weight/behavior correlation trend");
  CriterionResult soup = Make(13, "model soup degradation");
  std::size_t reduced = 0, degraded = 0;
  double aligned_sum = 0.0;
  for (std::size_t s = 0; s < 5; ++s) {
    const auto z = zoo::generate_zoo(zoo::seed_config(15, cfg.zoo_epochs, cfg.seed + 200 + s), cfg.parallelism);
    const auto c = symmetry::canonicalize_zoo(z, z.models.front().model_id, cfg.parallelism);
    const auto data = zoo::zoo_dataset(z.factors.dataset);
    const auto arch = c.architecture_of(c.models.front());
    std::vector<nn::ModelWeights> models;
    for (const auto& t : c.models) models.push_back(t.checkpoints.back().weights);
    std::vector<std::size_t> rows(std::min<std::size_t>(50, data.test.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const Matrix probe = data.test.subset(rows, "probe").samples;

    analysis::CorrelationOptions o;
    o.seed = derive_seed(cfg.seed, "c7", s);
    const double aligned = std::abs(analysis::weight_behavior_correlation(models, arch, probe, o).rho);
    o.permutations_per_model = 5;
    const double permuted = std::abs(analysis::weight_behavior_correlation(models, arch, probe, o).rho);
    aligned_sum += aligned;
    reduced += permuted < aligned ? 1 : 0;
    corr.values.emplace_back("seed" + std::to_string(s) + "_aligned_abs_rho", aligned);
    corr.values.emplace_back("seed" + std::to_string(s) + "_permuted_abs_rho", permuted);

    const std::vector<nn::ModelWeights> five(models.begin(), models.begin() + 5);
    double best = 0.0;
    for (const auto& w : five)
      best = std::max(best, nn::evaluate(w, arch, data.test.samples, data.test.labels).accuracy);
    const double mixed =
        nn::evaluate(analysis::soup_average(five, true), arch, data.test.samples, data.test.labels).accuracy;
    degraded += mixed <= best ? 1 : 0;
    soup.values.emplace_back("seed" + std::to_string(s) + "_soup_acc", mixed);
    soup.values.emplace_back("seed" + std::to_string(s) + "_best_acc", best);
  }
  const double mean_aligned = aligned_sum / 5.0;
  corr.values.emplace_back("mean_aligned_abs_rho", mean_aligned);
  corr.values.emplace_back("seeds_reduced", static_cast<double>(reduced));
  corr.pass = mean_aligned > 0.1 && reduced >= 4;
  soup.values.emplace_back("seeds_degraded", static_cast<double>(degraded));
  soup.pass = degraded >= 4;
  return {corr, soup};
}

double ProbeR2(const std::vector<analysis::ProbeRow>& rows, const std::string& target) {
  for (const auto& r : rows)
    if (r.target == target) return r.test_r2;
  throw Error(ErrorKind::kInvalidArgument, "probe suite has no target " + target);
}

CriterionResult Probing(const zoo::Zoo& z, const hyperrep::HyperRep& hr) {
  CriterionResult r = Make(8, "linear probing");
  const auto stats = analysis::probe_suite(z, "s(W)", analysis::stat_features());
  const auto samples = analysis::probe_samples(z);
  std::vector<nn::ModelWeights> ws;
  for (const auto& s : samples) ws.push_back(z.models[s.model_index].checkpoints[s.epoch].weights);
  const auto latents = hyperrep::embed_models(hr, ws);
  Matrix features(latents.size(), latents.front().cols());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const auto a = hyperrep::aggregate(latents[i]);
    for (std::size_t c = 0; c < a.size(); ++c) features(i, c) = a[c];
  }
  const auto hyper = analysis::probe_suite(z, "hyperrep", features, samples);
  const double acc = ProbeR2(stats, "acc"), eph = ProbeR2(stats, "eph"), h_eph = ProbeR2(hyper, "eph");
  r.values = {{"sW_acc_r2", acc}, {"sW_eph_r2", eph}, {"hyperrep_eph_r2", h_eph},
              {"hyperrep_acc_r2", ProbeR2(hyper, "acc")}};
  r.pass = acc >= 0.7 && eph >= 0.7 && h_eph >= 0.6;
  return r;
}

// Masked loss ignores whatever sits in the padded slots.
bool PaddingInvariant(const zoo::Zoo& z) {
  const auto& w = z.models.front().checkpoints.back().weights;
  const auto ts = hyperrep::tokenize(w, 16);
  Matrix pred = ts.tokens, corrupt;
  Rng rng(1);
  for (double& v : pred.values()) v += standard_normal(rng);
  corrupt = pred;
  for (std::size_t i = 0; i < corrupt.size(); ++i)
    if (ts.mask.values()[i] == 0.0) corrupt.values()[i] = 1e6;
  ad::Tape a, b;
  const double la = a.value(a.masked_mse(a.constant(pred), ts.tokens, ts.mask))(0, 0);
  const double lb = b.value(b.masked_mse(b.constant(corrupt), ts.tokens, ts.mask))(0, 0);
  return la == lb;
}

CriterionResult Reconstruction(const AcceptanceConfig& cfg, const zoo::Zoo& z, const hyperrep::PretrainResult& run) {
  CriterionResult r = Make(9, "autoencoder reconstruction");
  const auto score = hyperrep::reconstruction_score(run.model, hyperrep::split_weights(run.prepared, zoo::Split::kTest));
  bool roundtrip = true;
  for (const auto& t : z.models) {
    const auto arch = z.architecture_of(t);
    for (const auto& c : t.checkpoints)
      for (std::size_t d_t : {5, 16, 17}) roundtrip = roundtrip && hyperrep::detokenize(hyperrep::tokenize(c.weights, d_t), arch) == c.weights;
  }
  const bool padding = PaddingInvariant(z);
  const double grad = autoencoder_gradient_error(derive_seed(cfg.seed, "c9-grad"));
  const double ratio = static_cast<double>(run.model.config.ae.d_t) / static_cast<double>(run.model.config.ae.d_z);
  r.values = {{"test_r2", score.r2},          {"test_loss", score.loss},
              {"compression", ratio},          {"roundtrip_exact", roundtrip ? 1.0 : 0.0},
              {"padding_invariant", padding ? 1.0 : 0.0}, {"gradient_rel_error", grad}};
  r.pass = score.r2 >= 0.5 && ratio >= 2.0 && roundtrip && padding && grad < 1e-3;
  return r;
}

std::vector<CriterionResult> Sampling(const AcceptanceConfig& cfg, const zoo::Zoo& z, const hyperrep::HyperRep& hr) {
  CriterionResult beats = Make(10, "sampling beats random init zero-shot");
  CriterionResult sub = Make(11, "subsampling at least plain KDE30");
  CriterionResult boot = Make(12, "bootstrap monotonicity");
  const auto data = zoo::zoo_dataset(z.factors.dataset);
  const auto arch = hr.ae.architecture();
  const auto metric = sampler::validation_accuracy(data, arch);

  std::vector<nn::ModelWeights> anchors;
  for (std::size_t id : sampler::kde30_anchors(z)) anchors.push_back(z.find(id)->final_viable()->weights);
  const auto kde = sampler::fit_kde(hyperrep::embed_models(hr, anchors));
  // random init baseline: the zoo's own epoch-0 checkpoints
  std::vector<nn::ModelWeights> inits;
  for (const auto& t : z.models) inits.push_back(t.checkpoints.front().weights);
  const double init_mean = MeanMetric(inits, metric);
  beats.values.emplace_back("random_init_mean", init_mean);

  std::size_t beat_hits = 0, sub_hits = 0;
  for (std::size_t s = 0; s < cfg.sampling_seeds; ++s) {
    const std::uint64_t seed = derive_seed(cfg.seed, "c10", s);
    const auto b = sampler::subsample(hr, kde, cfg.candidates, cfg.keep, metric, seed, cfg.parallelism);
    const double baseline = MeanMetric(sampler::weight_space_kde_sample(anchors, cfg.candidates, seed), metric);
    const std::string tag = "seed" + std::to_string(s);
    beats.values.emplace_back(tag + "_subsample_mean", b.selected_mean());
    beats.values.emplace_back(tag + "_weight_space_mean", baseline);
    sub.values.emplace_back(tag + "_subsample_mean", b.selected_mean());
    sub.values.emplace_back(tag + "_kde30_all_mean", b.candidate_mean());
    beat_hits += b.selected_mean() > 0.35 && b.selected_mean() > baseline && b.selected_mean() > init_mean ? 1 : 0;
    sub_hits += b.selected_mean() >= b.candidate_mean() ? 1 : 0;
  }
  beats.values.emplace_back("seeds_passing", static_cast<double>(beat_hits));
  beats.pass = Enough(beat_hits, cfg.sampling_seeds, 0.8);
  sub.values.emplace_back("seeds_passing", static_cast<double>(sub_hits));
  sub.pass = Enough(sub_hits, cfg.sampling_seeds, 0.8);

  const auto prior = sampler::fit_gaussian_prior(hyperrep::embed_models(hr, FinalWeights(z, zoo::Split::kTrain)));
  std::size_t mono = 0;
  for (std::size_t s = 0; s < cfg.bootstrap_seeds; ++s) {
    const auto res = sampler::bootstrap(hr, prior, 3, cfg.candidates, cfg.keep, metric,
                                        derive_seed(cfg.seed, "c12", s), sampler::AnchorMode::kPerSample,
                                        cfg.parallelism);
    const auto m = res.best_means();
    for (std::size_t i = 0; i < m.size(); ++i)
      boot.values.emplace_back("seed" + std::to_string(s) + "_iter" + std::to_string(i + 1), m[i]);
    mono += std::is_sorted(m.begin(), m.end()) ? 1 : 0;
  }
  boot.values.emplace_back("seeds_monotone", static_cast<double>(mono));
  boot.pass = Enough(mono, cfg.bootstrap_seeds, 0.8);
  return {beats, sub, boot};
}

std::vector<CriterionResult> RunOnce(const AcceptanceConfig& cfg, const Progress& progress,
                                     AcceptanceArtifacts* artifacts) {
  std::vector<CriterionResult> out;
  auto add = [&](CriterionResult r) {
    if (progress) progress(r);
    out.push_back(std::move(r));
  };
  add(Forward(cfg));
  add(Backward(cfg));
  add(Count());
  add(AlignOracle(cfg));
  add(AlignDistance(cfg));
  add(Entropy(cfg));
  auto [corr, soup] = CorrelationAndSoup(cfg);
  add(std::move(corr));

  const auto main = zoo::generate_zoo(zoo::seed_config(cfg.main_zoo_models, cfg.zoo_epochs, cfg.seed), cfg.parallelism);
  hyperrep::PretrainConfig pc;
  pc.epochs = cfg.ae_epochs;
  pc.learning_rate = cfg.ae_learning_rate;
  pc.seed = derive_seed(cfg.seed, "pretrain");
  pc.parallelism = cfg.parallelism;
  auto run = hyperrep::pretrain(main, pc);
  add(Probing(main, run.model));
  add(Reconstruction(cfg, main, run));
  for (auto& r : Sampling(cfg, main, run.model)) add(std::move(r));
  add(std::move(soup));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (artifacts) {
    artifacts->main_zoo = main;
    artifacts->pretrain = std::move(run);
  }
  return out;
}

}  // namespace

void AcceptanceConfig::validate() const {
  require(main_zoo_models >= 10, ErrorKind::kInvalidArgument, "acceptance: main_zoo_models must be >= 10");
  require(zoo_epochs >= 1 && ae_epochs >= 1, ErrorKind::kInvalidArgument, "acceptance: epochs must be >= 1");
  require(ae_learning_rate > 0 && std::isfinite(ae_learning_rate), ErrorKind::kInvalidArgument,
          "acceptance: ae_learning_rate must be positive");
  require(sampling_seeds >= 1 && bootstrap_seeds >= 1, ErrorKind::kInvalidArgument,
          "acceptance: seed counts must be >= 1");
  require(keep >= 1 && keep <= candidates, ErrorKind::kInvalidArgument, "acceptance: need 1 <= keep <= candidates");
  require(parallelism >= 1, ErrorKind::kInvalidArgument, "acceptance: parallelism must be >= 1");
}

nlohmann::json AcceptanceConfig::to_json() const {
  return {{"seed", seed},
          {"parallelism", parallelism},
          {"main_zoo_models", main_zoo_models},
          {"zoo_epochs", zoo_epochs},
          {"ae_epochs", ae_epochs},
          {"ae_learning_rate", ae_learning_rate},
          {"sampling_seeds", sampling_seeds},
          {"bootstrap_seeds", bootstrap_seeds},
          {"candidates", candidates},
          {"keep", keep},
          {"check_determinism", check_determinism}};
}

AcceptanceConfig AcceptanceConfig::from_json(const nlohmann::json& j) {
  AcceptanceConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.main_zoo_models = j.value("main_zoo_models", c.main_zoo_models);
    c.zoo_epochs = j.value("zoo_epochs", c.zoo_epochs);
    c.ae_epochs = j.value("ae_epochs", c.ae_epochs);
    c.ae_learning_rate = j.value("ae_learning_rate", c.ae_learning_rate);
    c.sampling_seeds = j.value("sampling_seeds", c.sampling_seeds);
    c.bootstrap_seeds = j.value("bootstrap_seeds", c.bootstrap_seeds);
    c.candidates = j.value("candidates", c.candidates);
    c.keep = j.value("keep", c.keep);
    c.check_determinism = j.value("check_determinism", c.check_determinism);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("acceptance config: ") + e.what());
  }
  c.validate();
  return c;
}

bool AcceptanceReport::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass; });
}

const CriterionResult* AcceptanceReport::find(int id) const {
  for (const auto& c : criteria)
    if (c.id == id) return &c;
  return nullptr;
}

nlohmann::json AcceptanceReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : criteria) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [k, v] : c.values) values[k] = v;
    arr.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"values", values}, {"detail", c.detail}});
  }
  return {{"criteria", arr}, {"all_pass", all_pass()}};
}

bool identical(const AcceptanceReport& a, const AcceptanceReport& b) {
  if (a.criteria.size() != b.criteria.size()) return false;
  for (std::size_t i = 0; i < a.criteria.size(); ++i) {
    const auto& x = a.criteria[i];
    const auto& y = b.criteria[i];
    if (x.id != y.id || x.pass != y.pass || x.values.size() != y.values.size()) return false;
    for (std::size_t j = 0; j < x.values.size(); ++j) {
      if (x.values[j].first != y.values[j].first) return false;
      if (std::bit_cast<std::uint64_t>(x.values[j].second) != std::bit_cast<std::uint64_t>(y.values[j].second))
        return false;
    }
  }
  return true;
}

AcceptanceReport run_acceptance(const AcceptanceConfig& config, const Progress& progress,
                                AcceptanceArtifacts* artifacts) {
  config.validate();
  AcceptanceReport report;
  report.criteria = RunOnce(config, progress, artifacts);
  if (config.check_determinism) {
    AcceptanceReport again;
    again.criteria = RunOnce(config, {}, nullptr);
    CriterionResult det = Make(14, "determinism");
    std::size_t values = 0;
    for (const auto& c : report.criteria) values += c.values.size();
    det.values = {{"values_compared", static_cast<double>(values)}};
    det.pass = identical(report, again);
    det.detail = det.pass ? "rerun reproduced every value bit-exactly" : "rerun differs";
    if (progress) progress(det);
    report.criteria.push_back(std::move(det));
  }
  return report;
}

void write_report_csv(const AcceptanceReport& report, std::ostream& out, std::uint64_t config_hash) {
  CsvWriter csv(out, config_hash, {"criterion", "name", "measurement", "value", "verdict"});
  for (const auto& c : report.criteria) {
    const std::string verdict = c.pass ? "PASS" : "FAIL";
    if (c.values.empty()) csv.row({static_cast<long long>(c.id), c.name, std::string(), std::string(), verdict});
    for (const auto& [k, v] : c.values) csv.row({static_cast<long long>(c.id), c.name, k, v, verdict});
  }
}

std::string summary_line(const CriterionResult& c) {
  std::string line = std::string(c.pass ? "PASS" : "FAIL") + " " + (c.id < 10 ? " " : "") + std::to_string(c.id) + " " + c.name;
  // headline values only: aggregates, not per-seed rows
  std::string shown;
  for (const auto& [k, v] : c.values) {
    const bool per_seed = (k.rfind("seed", 0) == 0 && k.size() > 4 && std::isdigit(static_cast<unsigned char>(k[4]))) ||
                          (k.rfind("rep", 0) == 0 && k.size() > 3 && std::isdigit(static_cast<unsigned char>(k[3])));
    if (per_seed) continue;
    shown += (shown.empty() ? "" : ", ") + k + "=" + format_number(v);
  }
  if (!shown.empty()) line += " (" + shown + ")";
  return line;
}

double autoencoder_gradient_error(std::uint64_t seed) {
  const auto arch = nn::Architecture::from_widths({3, 2, 2});
  hyperrep::AEConfig cfg;
  cfg.d_t = 4;
  cfg.d_z = 2;
  cfg.d_model = 8;
  cfg.depth = 2;
  cfg.heads = 2;
  cfg.window = 2;
  cfg.head_hidden = 6;
  cfg.head_layers = 2;
  cfg.head_out = 3;
  hyperrep::Autoencoder ae(cfg, arch, seed);
  const auto w = nn::init_weights(arch, nn::InitMethod::kKaimingUniform, derive_seed(seed, "weights"));
  const auto a = hyperrep::tokenize(w, cfg.d_t);
  const auto b = hyperrep::tokenize(symmetry::add_noise(w, 0.3, derive_seed(seed, "noise")), cfg.d_t);
  // two windows of two tokens
  hyperrep::TrainingBatch batch;
  batch.view1 = Matrix(4, cfg.d_t);
  batch.view2 = Matrix(4, cfg.d_t);
  batch.mask = Matrix(4, cfg.d_t);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < cfg.d_t; ++c) {
      batch.view1(r, c) = a.tokens(r, c);
      batch.view2(r, c) = b.tokens(r, c);
      batch.mask(r, c) = a.mask(r, c);
    }
    batch.positions.push_back(a.positions[r]);
  }
  auto loss = [&] {
    ad::Tape t(&std::as_const(ae.params()));
    return t.value(hyperrep::composite_loss(t, ae, batch, 0.3, 0.5).total)(0, 0);
  };
  ae.params().zero_grad();
  {
    ad::Tape t(&ae.params());
    t.backward(hyperrep::composite_loss(t, ae, batch, 0.3, 0.5).total);
  }
  const std::vector<double> analytic(ae.params().flat_grad().begin(), ae.params().flat_grad().end());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ae.params().size(); ++i) {
    double& p = ae.params().flat()[i];
    const double orig = p, h = 1e-5;
    p = orig + h;
    const double fp = loss();
    p = orig - h;
    const double fm = loss();
    p = orig;
    const double fd = (fp - fm) / (2 * h);
    num += (fd - analytic[i]) * (fd - analytic[i]);
    den += fd * fd;
  }
  return std::sqrt(num / den);
}

}  // namespace hz::pipeline
