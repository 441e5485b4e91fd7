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

// hyperzoo command-line front end. Every subcommand resolves its settings
// from built-in defaults, then an optional JSON --config file, then explicit
// flags, and writes the resolved settings to <out>/config.json.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "hz/analysis/probe.hpp"
#include "hz/analysis/weight_features.hpp"
#include "hz/core/csv.hpp"
#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"
#include "hz/hyperrep/hyperrep.hpp"
#include "hz/pipeline/acceptance.hpp"
#include "hz/sampler/sampler.hpp"
#include "hz/symmetry/symmetry.hpp"
#include "hz/zoo/diversity.hpp"
#include "hz/zoo/store.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hz;

namespace {

// Exit codes by error category.
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitIo = 4;
constexpr int kExitInvalid = 5;
constexpr int kExitAcceptance = 6;
constexpr int kExitInternal = 1;

struct Context {
  std::string command;
  json config;  // resolved
  fs::path out;
  std::uint64_t hash = 0;

  std::size_t jobs() const { return config.at("jobs").get<std::size_t>(); }
  std::uint64_t seed() const { return config.at("seed").get<std::uint64_t>(); }
  std::string str(const char* key) const { return config.at(key).get<std::string>(); }
  std::size_t size(const char* key) const { return config.at(key).get<std::size_t>(); }
  double num(const char* key) const { return config.at(key).get<double>(); }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(out / name, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::kIo, "cannot write " + (out / name).string());
    return f;
  }
  fs::path existing(const char* key) const {
    const fs::path p = str(key);
    require(!p.empty(), ErrorKind::kInvalidArgument, std::string("--") + key + " is required");
    require(fs::exists(p), ErrorKind::kIo, "missing " + std::string(key) + ": " + p.string());
    return p;
  }
};

struct Command {
  std::string name;
  std::string help;
  json defaults;  // flat keys become flags; objects only come from --config
  std::function<int(const Context&)> run;
};

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<nn::ModelWeights> FinalWeights(const zoo::Zoo& z, std::vector<std::size_t>* ids = nullptr) {
  std::vector<nn::ModelWeights> out;
  for (const auto& t : z.models) {
    if (const auto* c = t.final_viable()) {
      out.push_back(c->weights);
      if (ids) ids->push_back(t.model_id);
    }
  }
  return out;
}

// --- zoo-gen -----------------------------------------------------------------

int ZooGen(const Context& ctx) {
  zoo::GeneratingFactors f;
  const std::string preset = ctx.str("preset");
  if (preset == "seed") {
    f = zoo::seed_config(ctx.size("models"), ctx.size("epochs"), ctx.seed());
  } else if (preset == "hyp-rand") {
    f = zoo::hyp_rand_config(ctx.size("seeds_per_node"), ctx.size("epochs"), ctx.seed());
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown preset '" + preset + "' (seed, hyp-rand)");
  }
  if (ctx.config.contains("factors")) {
    json merged = zoo::to_json(f);
    merged.merge_patch(ctx.config.at("factors"));
    f = zoo::factors_from_json(merged);
  }
  const auto z = zoo::generate_zoo(f, ctx.jobs());
  zoo::save_zoo(z, ctx.out);
  std::size_t checkpoints = 0, nonviable = 0;
  for (const auto& t : z.models) {
    checkpoints += t.checkpoints.size();
    for (const auto& c : t.checkpoints) nonviable += c.viable ? 0 : 1;
  }
  std::printf("zoo: %zu models, %zu checkpoints (%zu non-viable) -> %s\n", z.models.size(), checkpoints,
              nonviable, ctx.out.string().c_str());
  return 0;
}

// --- zoo-analyze -------------------------------------------------------------

int ZooAnalyze(const Context& ctx) {
  const auto z = zoo::load_zoo(ctx.existing("zoo"));
  const auto data = zoo::zoo_dataset(z.factors.dataset);
  {
    auto f = ctx.open("diversity.csv");
    zoo::write_csv(zoo::diversity_report(z, data.test, ctx.size("cka_samples")), f, ctx.hash);
  }
  const auto entropy = analysis::entropy_trajectory(z);
  auto f = ctx.open("entropy.csv");
  CsvWriter csv(f, ctx.hash, {"epoch", "median_entropy"});
  for (std::size_t e = 0; e < entropy.size(); ++e) csv.row({static_cast<long long>(e), entropy[e]});
  std::printf("median entropy: epoch 0 %s, final %s\n", format_number(entropy.front()).c_str(),
              format_number(entropy.back()).c_str());
  return 0;
}

// --- symmetry-verify ---------------------------------------------------------

int SymmetryVerify(const Context& ctx) {
  const auto z = zoo::load_zoo(ctx.existing("zoo"));
  const auto data = zoo::zoo_dataset(z.factors.dataset);
  const std::size_t samples = ctx.size("samples");
  require(samples > 0, ErrorKind::kInvalidArgument, "--samples must be positive");
  double fwd = 0.0, bwd = 0.0;
  std::size_t fwd_ok = 0, bwd_ok = 0, align_ok = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto& t = z.models[i % z.models.size()];
    const auto arch = z.architecture_of(t);
    const auto& w = t.checkpoints.front().weights;
    const auto p = symmetry::random_permutation_set(arch, derive_seed(ctx.seed(), "verify", i));
    const auto pw = symmetry::apply_permutation(w, p);
    const double dev = symmetry::max_forward_deviation(w, pw, arch, data.test.samples);
    fwd = std::max(fwd, dev);
    fwd_ok += dev < 1e-9 ? 1 : 0;
    symmetry::BackwardCheck check;
    check.batch_seed = check.permuted_batch_seed = derive_seed(ctx.seed(), "verify-batches", i);
    const auto b = symmetry::backward_equivalence(w, arch, p, data.train.samples, data.train.labels, check);
    bwd = std::max(bwd, b.max_deviation);
    bwd_ok += b.equivalent ? 1 : 0;
    align_ok += symmetry::align(pw, w).aligned == w ? 1 : 0;
  }
  auto f = ctx.open("symmetry.csv");
  CsvWriter csv(f, ctx.hash, {"check", "passed", "total", "max_deviation", "verdict"});
  const auto n = static_cast<long long>(samples);
  auto line = [&](const char* name, std::size_t ok, double dev) {
    const std::string verdict = ok == samples ? "PASS" : "FAIL";
    csv.row({std::string(name), static_cast<long long>(ok), n, dev, verdict});
    std::printf("%s %s %zu/%zu (max deviation %s)\n", verdict.c_str(), name, ok, samples, format_number(dev).c_str());
  };
  line("forward", fwd_ok, fwd);
  line("backward", bwd_ok, bwd);
  line("alignment", align_ok, 0.0);
  return 0;
}

// --- probe -------------------------------------------------------------------

int Probe(const Context& ctx) {
  const auto z = zoo::load_zoo(ctx.existing("zoo"));
  analysis::ProbeSuiteOptions o;
  o.epoch_stride = ctx.size("stride");
  o.ridge = ctx.num("ridge");
  o.categorical = ctx.config.at("categorical").get<bool>();
  std::vector<analysis::ProbeRow> rows;
  for (const auto& feature : SplitList(ctx.str("features"))) {
    std::vector<analysis::ProbeRow> part;
    if (feature == "s(W)" || feature == "stats") {
      part = analysis::probe_suite(z, "s(W)", analysis::stat_features(), o);
    } else if (feature == "W" || feature == "weights") {
      part = analysis::probe_suite(z, "W", analysis::raw_weight_features(), o);
    } else if (feature == "hyperrep") {
      const auto hr = hyperrep::load_hyperrep(ctx.existing("ae"));
      const auto samples = analysis::probe_samples(z, o.epoch_stride);
      std::vector<nn::ModelWeights> ws;
      for (const auto& s : samples) ws.push_back(z.models[s.model_index].checkpoints[s.epoch].weights);
      const auto latents = hyperrep::embed_models(hr, ws);
      Matrix x(latents.size(), latents.front().cols());
      for (std::size_t i = 0; i < latents.size(); ++i) {
        const auto a = hyperrep::aggregate(latents[i]);
        for (std::size_t c = 0; c < a.size(); ++c) x(i, c) = a[c];
      }
      part = analysis::probe_suite(z, "hyperrep", x, samples, o);
    } else {
      throw Error(ErrorKind::kInvalidArgument, "unknown feature '" + feature + "' (s(W), W, hyperrep)");
    }
    rows.insert(rows.end(), part.begin(), part.end());
  }
  auto f = ctx.open("probe.csv");
  analysis::write_probe_csv(rows, f, ctx.hash);
  for (const auto& r : rows)
    std::printf("%-8s %-5s test R2 %s\n", r.feature.c_str(), r.target.c_str(), format_number(r.test_r2).c_str());
  return 0;
}

// --- pretrain ----------------------------------------------------------------

hyperrep::PretrainConfig PretrainFrom(const Context& ctx) {
  json j = hyperrep::PretrainConfig{}.to_json();
  for (auto& [k, v] : j.items())
    if (ctx.config.contains(k) && k != "ae") v = ctx.config.at(k);
  if (ctx.config.contains("ae")) j["ae"].merge_patch(ctx.config.at("ae"));
  j["seed"] = ctx.seed();
  j["parallelism"] = ctx.jobs();
  return hyperrep::PretrainConfig::from_json(j);
}

int Pretrain(const Context& ctx) {
  const auto z = zoo::load_zoo(ctx.existing("zoo"));
  const auto cfg = PretrainFrom(ctx);
  auto curve_file = ctx.open("loss_curve.csv");
  CsvWriter csv(curve_file, ctx.hash,
                {"epoch", "batches", "loss", "reconstruction", "contrastive", "val_reconstruction"});
  const auto run = hyperrep::pretrain(z, cfg, [&](const hyperrep::EpochRecord& r) {
    csv.row({static_cast<long long>(r.epoch), static_cast<long long>(r.batches), r.loss, r.reconstruction,
             r.contrastive, r.val_reconstruction});
    std::printf("epoch %zu loss %s val recon %s\n", r.epoch, format_number(r.loss).c_str(),
                format_number(r.val_reconstruction).c_str());
    std::fflush(stdout);
  });
  hyperrep::save_hyperrep(run.model, ctx.out / "hyperrep.hzae");
  const auto score =
      hyperrep::reconstruction_score(run.model, hyperrep::split_weights(run.prepared, zoo::Split::kTest));
  auto f = ctx.open("reconstruction.csv");
  CsvWriter rec(f, ctx.hash, {"split", "loss", "r2"});
  rec.row({std::string("test"), score.loss, score.r2});
  std::printf("test reconstruction R2 %s\n", format_number(score.r2).c_str());
  return 0;
}

// --- embed -------------------------------------------------------------------

int Embed(const Context& ctx) {
  const auto hr = hyperrep::load_hyperrep(ctx.existing("ae"));
  const auto z = zoo::load_zoo(ctx.existing("zoo"));
  std::vector<std::size_t> ids;
  std::vector<nn::ModelWeights> ws;
  const std::string split = ctx.str("split");
  for (const auto& t : z.models) {
    if (split != "all" && t.split != zoo::parse_split(split)) continue;
    if (const auto* c = t.final_viable()) {
      ids.push_back(t.model_id);
      ws.push_back(c->weights);
    }
  }
  require(!ws.empty(), ErrorKind::kInvalidArgument, "no viable models in split " + split);
  hyperrep::write_embeddings_csv(ctx.out / "embeddings.csv", ids, hyperrep::embed_models(hr, ws), ctx.hash);
  std::printf("embedded %zu models\n", ws.size());
  return 0;
}

// --- sample ------------------------------------------------------------------

sampler::AnchorMode ParseMode(const std::string& s) {
  if (s == "token") return sampler::AnchorMode::kPerToken;
  if (s == "sample") return sampler::AnchorMode::kPerSample;
  throw Error(ErrorKind::kInvalidArgument, "unknown anchor mode '" + s + "' (token, sample)");
}

int Sample(const Context& ctx) {
  const auto hr = hyperrep::load_hyperrep(ctx.existing("ae"));
  const auto z = zoo::load_zoo(ctx.existing("zoo"));
  const auto data = zoo::zoo_dataset(z.factors.dataset);
  const auto arch = hr.ae.architecture();
  const auto metric = sampler::validation_accuracy(data, arch);
  const std::string strategy = ctx.str("strategy");
  const std::size_t k = ctx.size("k"), m = ctx.size("m");
  const auto mode = ParseMode(ctx.str("anchor_mode"));

  const auto anchor_ids = sampler::kde30_anchors(z, ctx.num("fraction"));
  std::vector<nn::ModelWeights> anchors;
  for (std::size_t id : anchor_ids) anchors.push_back(z.find(id)->final_viable()->weights);
  json extra = {{"anchor_ids", anchor_ids}};

  sampler::SampleBatch batch;
  std::vector<sampler::BootstrapIteration> iterations;
  if (strategy == "weightspace") {
    // no decoder involved: score raw samples directly
    for (auto& w : sampler::weight_space_kde_sample(anchors, k, ctx.seed())) {
      sampler::Candidate c;
      c.index = batch.candidates.size();
      c.metric = metric(w);
      c.weights = std::move(w);
      batch.candidates.push_back(std::move(c));
    }
    std::vector<std::size_t> order(batch.candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return batch.candidates[a].metric > batch.candidates[b].metric;
    });
    batch.selected.assign(order.begin(), order.begin() + std::min(m, order.size()));
  } else {
    const auto kde = sampler::fit_kde(hyperrep::embed_models(hr, anchors), mode);
    extra["bandwidth_mean"] = [&] {
      double s = 0;
      for (double h : kde.bandwidth.values()) s += h;
      return s / static_cast<double>(kde.bandwidth.size());
    }();
    if (strategy == "kde30") {
      batch = sampler::subsample(hr, kde, k, k, metric, ctx.seed(), ctx.jobs());
    } else if (strategy == "subsample") {
      batch = sampler::subsample(hr, kde, k, m, metric, ctx.seed(), ctx.jobs());
    } else if (strategy == "bootstrap" || strategy == "gauss") {
      sampler::BootstrapResult res;
      if (strategy == "gauss") {
        const auto prior = sampler::fit_gaussian_prior(hyperrep::embed_models(hr, FinalWeights(z)));
        res = sampler::bootstrap(hr, prior, ctx.size("iterations"), k, m, metric, ctx.seed(), mode, ctx.jobs());
      } else {
        res = sampler::bootstrap(hr, kde, ctx.size("iterations"), k, m, metric, ctx.seed(), mode, ctx.jobs());
      }
      iterations = res.iterations;
      batch = res.final_batch();
      extra["iterations"] = iterations.size();
    } else {
      throw Error(ErrorKind::kInvalidArgument,
                  "unknown strategy '" + strategy + "' (kde30, subsample, bootstrap, gauss, weightspace)");
    }
  }

  zoo::save_zoo(sampler::sample_zoo(batch, arch, data, strategy, extra), ctx.out / "samples");
  std::vector<nn::ModelWeights> chosen;
  for (std::size_t i : batch.selected) chosen.push_back(batch.candidates[i].weights);
  sampler::FinetuneOptions fo;
  fo.epochs = ctx.size("finetune_epochs");
  fo.optimizer = z.models.front().config.optimizer;
  fo.seed = ctx.seed();
  fo.parallelism = ctx.jobs();
  const auto table = sampler::finetune_eval(chosen, arch, data, fo);
  {
    auto f = ctx.open("finetune.csv");
    std::vector<std::string> cols{"model"};
    for (std::size_t e : table.epochs) cols.push_back("epoch_" + std::to_string(e));
    CsvWriter csv(f, ctx.hash, cols);
    for (std::size_t i = 0; i < table.accuracy.size(); ++i) {
      std::vector<CsvWriter::Cell> row{static_cast<long long>(i)};
      for (double a : table.accuracy[i]) row.emplace_back(a);
      csv.row(row);
    }
    std::vector<CsvWriter::Cell> mean{std::string("mean")};
    for (double a : table.mean()) mean.emplace_back(a);
    csv.row(mean);
  }
  if (!iterations.empty()) {
    auto f = ctx.open("iterations.csv");
    CsvWriter csv(f, ctx.hash, {"iteration", "source", "anchors", "mean_bandwidth", "candidate_mean",
                                "selected_mean", "conditioning"});
    for (const auto& it : iterations)
      csv.row({static_cast<long long>(it.iteration), it.source, static_cast<long long>(it.anchors.size()),
               it.mean_bandwidth, it.batch.candidate_mean(), it.batch.selected_mean(), it.conditioning});
  }
  std::printf("%s: %zu candidates, selected mean zero-shot %s (all %s)\n", strategy.c_str(),
              batch.candidates.size(), format_number(batch.selected_mean()).c_str(),
              format_number(batch.candidate_mean()).c_str());
  return 0;
}

// --- report ------------------------------------------------------------------

int Report(const Context& ctx) {
  json j = ctx.config;
  j["parallelism"] = ctx.jobs();
  const auto cfg = pipeline::AcceptanceConfig::from_json(j);
  const auto report = pipeline::run_acceptance(cfg, [](const pipeline::CriterionResult& c) {
    std::printf("%s\n", pipeline::summary_line(c).c_str());
    std::fflush(stdout);
  });
  {
    auto f = ctx.open("report.csv");
    pipeline::write_report_csv(report, f, ctx.hash);
  }
  ctx.open("report.json") << report.to_json().dump(1) << "\n";
  if (!report.all_pass()) {
    std::fprintf(stderr, "error[acceptance]: %zu criteria failed\n",
                 static_cast<std::size_t>(std::count_if(report.criteria.begin(), report.criteria.end(),
                                                        [](const auto& c) { return !c.pass; })));
    return kExitAcceptance;
  }
  return 0;
}

std::vector<Command> Commands() {
  const pipeline::AcceptanceConfig acc;
  json report_defaults = acc.to_json();
  report_defaults.erase("parallelism");
  report_defaults.erase("seed");
  return {
      {"zoo-gen", "Train a model zoo", {{"preset", "seed"}, {"models", 10}, {"epochs", 25}, {"seeds_per_node", 1}},
       ZooGen},
      {"zoo-analyze", "Diversity and entropy trajectory of a zoo", {{"zoo", ""}, {"cka_samples", 50}}, ZooAnalyze},
      {"symmetry-verify", "Check permutation equivalence and alignment on zoo models",
       {{"zoo", ""}, {"samples", 20}}, SymmetryVerify},
      {"probe", "Linear probes from weight features to model properties",
       {{"zoo", ""}, {"features", "s(W),W"}, {"ae", ""}, {"stride", 5}, {"ridge", 1e-6}, {"categorical", false}},
       Probe},
      {"pretrain", "Train a hyper-representation autoencoder",
       [] {
         json d = hyperrep::PretrainConfig{}.to_json();
         d.erase("seed");
         d.erase("parallelism");
         d["zoo"] = "";
         return d;
       }(),
       Pretrain},
      {"embed", "Embed final checkpoints with a trained autoencoder", {{"ae", ""}, {"zoo", ""}, {"split", "all"}},
       Embed},
      {"sample", "Generate models from the latent space",
       {{"ae", ""},
        {"zoo", ""},
        {"strategy", "subsample"},
        {"k", 50},
        {"m", 5},
        {"iterations", 3},
        {"fraction", 0.3},
        {"anchor_mode", "token"},
        {"finetune_epochs", 5}},
       Sample},
      {"report", "Run the full acceptance pipeline", report_defaults, Report},
  };
}

json ReadConfigFile(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "missing config file: " + path);
  try {
    json j = json::parse(in, nullptr, true, true);
    require(j.is_object(), ErrorKind::kParse, "config file must hold a JSON object: " + path);
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, "config file " + path + ": " + e.what());
  }
}

// Flag text is read as JSON when it parses (numbers, booleans), else as a string.
json FlagValue(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded() || v.is_object() || v.is_array()) return text;
  return v;
}

fs::path DefaultOut(const std::string& command) {
  const char* root = std::getenv("HZ_OUT_ROOT");
  return fs::path(root && *root ? root : "hz_out") / command;
}

int ExitFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return kExitParse;
    case ErrorKind::kIo: return kExitIo;
    default: return kExitInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperzoo: model zoos, weight-space analysis and hyper-representations"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Global seed")->capture_default_str();
  app.add_option("--out", out, "Output directory (default $HZ_OUT_ROOT/<command> or hz_out/<command>)");
  auto* jobs_opt = app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--config", config_path, "JSON config file");

  const auto commands = Commands();
  std::map<std::string, std::map<std::string, std::pair<CLI::Option*, std::string>>> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    subs[c.name] = sub;
    // global flags are accepted after the subcommand as well
    sub->fallthrough();
    for (const auto& [key, value] : c.defaults.items()) {
      if (value.is_object()) continue;
      auto& slot = flags[c.name][key];
      std::string names = "--" + key;
      if (key.find('_') != std::string::npos) {
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        names += ",--" + dashed;
      }
      slot.first = sub->add_option(names, slot.second, "default " + value.dump());
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const Command* cmd = nullptr;
  for (const auto& c : commands)
    if (subs[c.name]->parsed()) cmd = &c;

  try {
    const json file = ReadConfigFile(config_path);
    Context ctx;
    ctx.command = cmd->name;
    ctx.config = cmd->defaults;
    // top-level keys apply to every command; a section named after the command wins
    for (const auto& [k, v] : file.items())
      if (k != cmd->name && (ctx.config.contains(k) || k == "seed" || k == "jobs" || k == "out" || k == "factors"))
        ctx.config[k] = v;
    if (file.contains(cmd->name)) ctx.config.merge_patch(file.at(cmd->name));
    if (!ctx.config.contains("seed") || seed_opt->count() > 0) ctx.config["seed"] = seed;
    if (!ctx.config.contains("jobs") || jobs_opt->count() > 0) ctx.config["jobs"] = jobs;
    for (const auto& [key, slot] : flags[cmd->name])
      if (slot.first->count() > 0) ctx.config[key] = FlagValue(slot.second);
    if (!out.empty()) ctx.config["out"] = out;
    if (!ctx.config.contains("out")) ctx.config["out"] = DefaultOut(cmd->name).string();
    ctx.out = ctx.config.at("out").get<std::string>();

    json resolved = ctx.config;
    resolved["command"] = cmd->name;
    // the output location does not change results, so it stays out of the hash
    json hashed = resolved;
    hashed.erase("out");
    ctx.hash = config_hash(hashed.dump());
    fs::create_directories(ctx.out);
    {
      std::ofstream f(ctx.out / "config.json");
      require(static_cast<bool>(f), ErrorKind::kIo, "cannot write " + (ctx.out / "config.json").string());
      f << resolved.dump(1) << "\n";
    }
    return cmd->run(ctx);
  } catch (const Error& e) {
    std::fprintf(stderr, "error[%s]: %s\n", to_string(e.kind()), e.what());
    return ExitFor(e.kind());
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error[parse]: config value: %s\n", e.what());
    return kExitParse;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error[io]: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return kExitInternal;
  }
}
