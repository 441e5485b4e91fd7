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

#include "hz/hyperrep/hyperrep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "hz/core/csv.hpp"
#include "hz/core/error.hpp"
#include "hz/core/rng.hpp"
#include "hz/nn/optimizer.hpp"
#include "hz/symmetry/symmetry.hpp"

namespace hz::hyperrep {

void PretrainConfig::validate() const {
  ae.validate();
  require(gamma >= 0.0 && gamma <= 1.0, ErrorKind::kInvalidArgument,
          "pretrain: gamma must be in [0, 1]");
  require(temperature > 0.0, ErrorKind::kInvalidArgument, "pretrain: temperature must be > 0");
  require(learning_rate >= 0.0 && view_noise >= 0.0, ErrorKind::kInvalidArgument,
          "pretrain: learning rate and view noise must be >= 0");
  require(batch_size >= 1, ErrorKind::kInvalidArgument, "pretrain: batch size must be >= 1");
}

nlohmann::json PretrainConfig::to_json() const {
  return {{"ae", ae.to_json()},
          {"gamma", gamma},
          {"temperature", temperature},
          {"learning_rate", learning_rate},
          {"view_noise", view_noise},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"windows_per_sample", windows_per_sample},
          {"align", align},
          {"seed", seed},
          {"parallelism", parallelism}};
}

PretrainConfig PretrainConfig::from_json(const nlohmann::json& j) {
  PretrainConfig c;
  if (j.contains("ae")) c.ae = AEConfig::from_json(j.at("ae"));
  auto get = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::remove_reference_t<decltype(dst)>>();
  };
  get("gamma", c.gamma);
  get("temperature", c.temperature);
  get("learning_rate", c.learning_rate);
  get("view_noise", c.view_noise);
  get("epochs", c.epochs);
  get("batch_size", c.batch_size);
  get("windows_per_sample", c.windows_per_sample);
  get("align", c.align);
  get("seed", c.seed);
  get("parallelism", c.parallelism);
  return c;
}

Matrix HyperRep::prepare_tokens(const nn::ModelWeights& w) const {
  const nn::ModelWeights aligned = reference ? symmetry::align(w, *reference).aligned : w;
  return tokenize(standardize(aligned, stats), ae.config().d_t).tokens;
}

std::size_t default_reference(const zoo::Zoo& zoo) {
  for (const auto& t : zoo.models) {
    if (t.split == zoo::Split::kTrain && t.final_viable() != nullptr) return t.model_id;
  }
  throw Error(ErrorKind::kInvalidArgument, "zoo has no viable train-split model");
}

std::vector<nn::ModelWeights> split_weights(const zoo::Zoo& zoo, zoo::Split split) {
  std::vector<nn::ModelWeights> out;
  for (const auto* t : zoo.in_split(split)) {
    for (const auto& c : t->checkpoints) {
      if (c.viable) out.push_back(c.weights);
    }
  }
  return out;
}

namespace {

double ValidationLoss(const Autoencoder& ae, const std::vector<TokenSequence>& seqs) {
  if (seqs.empty()) return 0.0;
  std::vector<Matrix> tokens;
  for (const auto& s : seqs) tokens.push_back(s.tokens);
  const auto rec = reconstruct_sequences(ae, tokens);
  double sse = 0.0, count = 0.0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t e = 0; e < rec[i].size(); ++e) {
      const double m = seqs[i].mask.values()[e];
      const double d = rec[i].values()[e] - seqs[i].tokens.values()[e];
      sse += m * d * d;
      count += m;
    }
  }
  return sse / count;
}

}  // namespace

PretrainResult pretrain(const zoo::Zoo& input, const PretrainConfig& config,
                        const EpochCallback& on_epoch) {
  config.validate();
  PretrainResult result;
  const std::size_t ref_id = default_reference(input);
  result.prepared =
      config.align ? symmetry::canonicalize_zoo(input, ref_id, config.parallelism) : input;
  const zoo::Zoo& z = result.prepared;
  const auto train = split_weights(z, zoo::Split::kTrain);
  require(!train.empty(), ErrorKind::kInvalidArgument, "pretrain: empty train split");
  const nn::Architecture arch = z.architecture_of(*z.find(ref_id));

  HyperRep& hr = result.model;
  hr.config = config;
  hr.stats = fit_standardizer(train);
  if (config.align) hr.reference = z.find(ref_id)->final_viable()->weights;
  hr.ae = Autoencoder(config.ae, arch, derive_seed(config.seed, "ae"));
  Autoencoder& ae = hr.ae;
  const std::size_t d_t = ae.config().d_t, n = ae.sequence_length(), ws = ae.config().window;

  std::vector<nn::ModelWeights> train_std;
  std::vector<TokenSequence> train_seq, val_seq;
  for (const auto& w : train) {
    train_std.push_back(standardize(w, hr.stats));
    train_seq.push_back(tokenize(train_std.back(), d_t));
  }
  for (const auto& w : split_weights(z, zoo::Split::kVal)) {
    val_seq.push_back(tokenize(standardize(w, hr.stats), d_t));
  }

  const std::size_t k = config.windows_per_sample > 0 ? config.windows_per_sample : (n + ws - 1) / ws;
  nn::OptimizerConfig opt;
  opt.kind = nn::OptimizerKind::kAdam;
  opt.learning_rate = config.learning_rate;
  nn::OptimizerState state;

  EpochRecord rec0;
  rec0.val_reconstruction = ValidationLoss(ae, val_seq);
  result.curve.push_back(rec0);
  if (on_epoch) on_epoch(rec0);

  std::size_t steps = 0;
  std::uint64_t view_counter = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    struct Item {
      std::size_t sample;
      std::size_t start;
    };
    std::vector<Item> items;
    items.reserve(train_seq.size() * k);
    for (std::size_t s = 0; s < train_seq.size(); ++s) {
      const auto wins =
          draw_windows(n, ws, k, derive_seed(config.seed, "train-windows", epoch * train_seq.size() + s));
      for (const auto& w : wins) items.push_back({s, w.start});
    }
    Rng shuffle_rng(derive_seed(config.seed, "train-shuffle", epoch));
    std::shuffle(items.begin(), items.end(), shuffle_rng);

    double sum_loss = 0.0, sum_rec = 0.0, sum_con = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < items.size(); first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, items.size() - first);
      TrainingBatch b;
      b.view1 = Matrix(count * ws, d_t);
      b.view2 = Matrix(count * ws, d_t);
      b.mask = Matrix(count * ws, d_t);
      b.positions.reserve(count * ws);
      for (std::size_t i = 0; i < count; ++i) {
        const Item& it = items[first + i];
        const TokenSequence& seq = train_seq[it.sample];
        const std::size_t off = i * ws * d_t, src = it.start * d_t;
        std::copy_n(seq.tokens.data() + src, ws * d_t, b.view1.data() + off);
        std::copy_n(seq.mask.data() + src, ws * d_t, b.mask.data() + off);
        for (std::size_t r = 0; r < ws; ++r) b.positions.push_back(seq.positions[it.start + r]);
        if (config.gamma > 0.0) {
          const std::uint64_t vs = derive_seed(config.seed, "view", view_counter++);
          const auto p = symmetry::random_permutation_set(arch, vs);
          const auto other = tokenize(
              symmetry::add_noise(symmetry::apply_permutation(train_std[it.sample], p),
                                  config.view_noise, vs),
              d_t);
          std::copy_n(other.tokens.data() + src, ws * d_t, b.view2.data() + off);
        }
      }
      ae.params().zero_grad();
      ad::Tape t(&ae.params());
      const LossTerms loss = composite_loss(t, ae, b, config.gamma, config.temperature);
      t.backward(loss.total);
      nn::apply_step(ae.params().flat(), ae.params().flat_grad(), opt, state);
      sum_loss += t.value(loss.total)(0, 0);
      sum_rec += loss.reconstruction;
      sum_con += loss.contrastive;
      ++batches;
      ++steps;
    }
    EpochRecord r;
    r.epoch = epoch;
    r.batches = steps;
    r.loss = sum_loss / static_cast<double>(batches);
    r.reconstruction = sum_rec / static_cast<double>(batches);
    r.contrastive = sum_con / static_cast<double>(batches);
    r.val_reconstruction = ValidationLoss(ae, val_seq);
    result.curve.push_back(r);
    if (on_epoch) on_epoch(r);
  }
  return result;
}

Matrix embed_model(const HyperRep& hr, const nn::ModelWeights& w, InferenceWindow win) {
  return embed_sequences(hr.ae, {hr.prepare_tokens(w)}, win).front();
}

std::vector<Matrix> embed_models(const HyperRep& hr, const std::vector<nn::ModelWeights>& ws,
                                 InferenceWindow win) {
  std::vector<Matrix> tokens;
  tokens.reserve(ws.size());
  for (const auto& w : ws) tokens.push_back(hr.prepare_tokens(w));
  return embed_sequences(hr.ae, tokens, win);
}

std::vector<nn::ModelWeights> decode_models(const HyperRep& hr, const std::vector<Matrix>& z,
                                            InferenceWindow win) {
  std::vector<nn::ModelWeights> out;
  out.reserve(z.size());
  for (const auto& t : decode_sequences(hr.ae, z, win)) {
    out.push_back(destandardize(detokenize(t, hr.ae.architecture()), hr.stats));
  }
  return out;
}

ReconstructionScore reconstruction_score(const HyperRep& hr,
                                         const std::vector<nn::ModelWeights>& models,
                                         InferenceWindow win) {
  require(!models.empty(), ErrorKind::kInvalidArgument, "reconstruction_score: no models");
  std::vector<Matrix> tokens;
  for (const auto& w : models) tokens.push_back(hr.prepare_tokens(w));
  const auto rec = reconstruct_sequences(hr.ae, tokens, win);
  const nn::Architecture& arch = hr.ae.architecture();
  const std::size_t p = arch.parameter_count();
  std::vector<std::vector<double>> truth, pred;
  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    truth.push_back(detokenize(tokens[i], arch).flatten());
    pred.push_back(detokenize(rec[i], arch).flatten());
    for (std::size_t j = 0; j < p; ++j) mean[j] += truth.back()[j];
  }
  for (double& m : mean) m /= static_cast<double>(models.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      sse += (pred[i][j] - truth[i][j]) * (pred[i][j] - truth[i][j]);
      sst += (truth[i][j] - mean[j]) * (truth[i][j] - mean[j]);
    }
  }
  ReconstructionScore s;
  s.loss = sse / static_cast<double>(models.size() * p);
  s.r2 = sst > 0.0 ? 1.0 - sse / sst : 0.0;
  return s;
}

namespace {

constexpr char kMagic[] = "HZAE1\n";

}  // namespace

void save_hyperrep(const HyperRep& hr, const std::filesystem::path& file) {
  nlohmann::json header;
  header["config"] = hr.config.to_json();
  header["ae"] = hr.ae.config().to_json();
  header["widths"] = hr.ae.architecture().widths();
  header["activation"] = std::string(nn::to_string(hr.ae.architecture().activation));
  header["stats"] = hr.stats.to_json();
  if (hr.reference) header["reference"] = hr.reference->flatten();
  header["float_order"] = "little-endian float32, parameters in declaration order";
  for (const auto& e : hr.ae.params().entries()) {
    header["parameters"].push_back({{"name", e.name}, {"rows", e.rows}, {"cols", e.cols}});
  }
  const std::string text = header.dump();
  std::ofstream out(file, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + file.string());
  out.write(kMagic, sizeof(kMagic) - 1);
  const std::uint64_t len = text.size();
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((len >> (8 * i)) & 0xff));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : hr.ae.params().flat()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
  require(static_cast<bool>(out), ErrorKind::kIo, "failed writing " + file.string());
}

HyperRep load_hyperrep(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot read " + file.string());
  char magic[sizeof(kMagic) - 1];
  in.read(magic, sizeof(magic));
  require(in && std::memcmp(magic, kMagic, sizeof(magic)) == 0, ErrorKind::kParse,
          file.string() + ": not an autoencoder checkpoint");
  unsigned char lb[8];
  in.read(reinterpret_cast<char*>(lb), 8);
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(lb[i]) << (8 * i);
  require(in && len < (1ULL << 32), ErrorKind::kParse, file.string() + ": bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  require(static_cast<bool>(in), ErrorKind::kParse, file.string() + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, file.string() + ": " + e.what());
  }
  HyperRep hr;
  hr.config = PretrainConfig::from_json(header.at("config"));
  const auto arch = nn::Architecture::from_widths(
      header.at("widths").get<std::vector<std::size_t>>(),
      nn::parse_activation(header.at("activation").get<std::string>()));
  hr.ae = Autoencoder(AEConfig::from_json(header.at("ae")), arch, 0);
  hr.stats = LayerNormStats::from_json(header.at("stats"));
  if (header.contains("reference")) {
    hr.reference = nn::ModelWeights::unflatten(header.at("reference").get<std::vector<double>>(), arch);
  }
  const auto& entries = hr.ae.params().entries();
  const auto& declared = header.at("parameters");
  require(declared.size() == entries.size(), ErrorKind::kParse,
          file.string() + ": parameter layout differs");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    require(declared[i].at("name") == entries[i].name && declared[i].at("rows") == entries[i].rows &&
                declared[i].at("cols") == entries[i].cols,
            ErrorKind::kParse, file.string() + ": parameter layout differs at " + entries[i].name);
  }
  auto flat = hr.ae.params().flat();
  for (double& v : flat) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    require(static_cast<bool>(in), ErrorKind::kParse, file.string() + ": truncated parameters");
    const std::uint32_t bits =
        b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    v = static_cast<double>(std::bit_cast<float>(bits));
  }
  require(in.peek() == std::char_traits<char>::eof(), ErrorKind::kParse,
          file.string() + ": trailing bytes");
  return hr;
}

void write_embeddings_csv(const std::filesystem::path& file, const std::vector<std::size_t>& ids,
                          const std::vector<Matrix>& latents, std::uint64_t config_hash) {
  require(ids.size() == latents.size(), ErrorKind::kInvalidArgument,
          "write_embeddings_csv: one id per sequence");
  std::ofstream out(file);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + file.string());
  std::vector<std::string> cols{"model_id", "token"};
  const std::size_t dz = latents.empty() ? 0 : latents.front().cols();
  for (std::size_t d = 0; d < dz; ++d) cols.push_back("z" + std::to_string(d));
  CsvWriter csv(out, config_hash, cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t r = 0; r < latents[i].rows(); ++r) {
      std::vector<CsvWriter::Cell> row{static_cast<long long>(ids[i]), static_cast<long long>(r)};
      for (double v : latents[i].row(r)) row.emplace_back(v);
      csv.row(row);
    }
  }
}

}  // namespace hz::hyperrep
