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

#include "hz/zoo/store.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "hz/core/error.hpp"

namespace hz::zoo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json Number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double NumberOr(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json MetricsJson(const Metrics& m) {
  return {{"train_loss", Number(m.train_loss)}, {"train_acc", Number(m.train_acc)},
          {"val_loss", Number(m.val_loss)},     {"val_acc", Number(m.val_acc)},
          {"test_loss", Number(m.test_loss)},   {"test_acc", Number(m.test_acc)}};
}

Metrics MetricsFrom(const json& j) {
  Metrics m;
  m.train_loss = NumberOr(j.at("train_loss"));
  m.train_acc = NumberOr(j.at("train_acc"));
  m.val_loss = NumberOr(j.at("val_loss"));
  m.val_acc = NumberOr(j.at("val_acc"));
  m.test_loss = NumberOr(j.at("test_loss"));
  m.test_acc = NumberOr(j.at("test_acc"));
  return m;
}

std::string WeightFile(std::size_t id, std::size_t epoch) {
  return "weights/m" + std::to_string(id) + "_e" + std::to_string(epoch) + ".bin";
}

}  // namespace

void write_f32_le(const fs::path& file, std::span<const double> values) {
  std::ofstream out(file, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + file.string());
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    const unsigned char bytes[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                    static_cast<unsigned char>(bits >> 16),
                                    static_cast<unsigned char>(bits >> 24)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
  }
}

std::vector<double> read_f32_le(const fs::path& file, std::size_t expected) {
  std::ifstream in(file, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot read " + file.string());
  std::vector<double> out;
  out.reserve(expected);
  unsigned char bytes[4];
  while (in.read(reinterpret_cast<char*>(bytes), 4)) {
    const std::uint32_t bits = bytes[0] | (bytes[1] << 8) | (bytes[2] << 16) |
                               (static_cast<std::uint32_t>(bytes[3]) << 24);
    out.push_back(static_cast<double>(std::bit_cast<float>(bits)));
  }
  require(out.size() == expected, ErrorKind::kParse,
          file.string() + ": expected " + std::to_string(expected) + " floats, found " +
              std::to_string(out.size()));
  return out;
}

json to_json(const GeneratingFactors& f) {
  json grid;
  for (auto m : f.grid.inits) grid["inits"].push_back(std::string(nn::to_string(m)));
  for (auto a : f.grid.activations) grid["activations"].push_back(std::string(nn::to_string(a)));
  for (auto o : f.grid.optimizers) grid["optimizers"].push_back(std::string(nn::to_string(o)));
  grid["learning_rates"] = f.grid.learning_rates;
  grid["weight_decays"] = f.grid.weight_decays;
  return {{"dataset",
           {{"name", "tetris"},
            {"n_per_class", f.dataset.n_per_class},
            {"pixel_noise_sigma", f.dataset.pixel_noise_sigma},
            {"seed", f.dataset.seed}}},
          {"widths", f.widths},
          {"grid", grid},
          {"seed_policy",
           {{"kind", std::string(to_string(f.seeds.kind))},
            {"seeds", f.seeds.seeds},
            {"count", f.seeds.count}}},
          {"epochs", f.epochs},
          {"batch_size", f.batch_size},
          {"global_seed", f.global_seed},
          {"nonviable_loss_threshold", f.nonviable_loss_threshold}};
}

GeneratingFactors factors_from_json(const json& j) {
  GeneratingFactors f;
  try {
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      f.dataset.n_per_class = d.value("n_per_class", f.dataset.n_per_class);
      f.dataset.pixel_noise_sigma = d.value("pixel_noise_sigma", f.dataset.pixel_noise_sigma);
      f.dataset.seed = d.value("seed", f.dataset.seed);
    }
    f.widths = j.value("widths", f.widths);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("inits")) {
        f.grid.inits.clear();
        for (const auto& s : g.at("inits")) f.grid.inits.push_back(nn::parse_init_method(s.get<std::string>()));
      }
      if (g.contains("activations")) {
        f.grid.activations.clear();
        for (const auto& s : g.at("activations"))
          f.grid.activations.push_back(nn::parse_activation(s.get<std::string>()));
      }
      if (g.contains("optimizers")) {
        f.grid.optimizers.clear();
        for (const auto& s : g.at("optimizers"))
          f.grid.optimizers.push_back(nn::parse_optimizer(s.get<std::string>()));
      }
      f.grid.learning_rates = g.value("learning_rates", f.grid.learning_rates);
      f.grid.weight_decays = g.value("weight_decays", f.grid.weight_decays);
    }
    if (j.contains("seed_policy")) {
      const auto& s = j.at("seed_policy");
      const std::string kind = s.value("kind", std::string("seed_sweep"));
      if (kind == "seed_sweep") f.seeds.kind = SeedPolicy::Kind::kSeedSweep;
      else if (kind == "fixed_seeds") f.seeds.kind = SeedPolicy::Kind::kFixedSeeds;
      else if (kind == "random_seeds") f.seeds.kind = SeedPolicy::Kind::kRandomSeeds;
      else throw Error(ErrorKind::kParse, "unknown seed policy: " + kind);
      f.seeds.seeds = s.value("seeds", std::vector<std::uint64_t>{});
      f.seeds.count = s.value("count", std::size_t{0});
    }
    f.epochs = j.value("epochs", f.epochs);
    f.batch_size = j.value("batch_size", f.batch_size);
    f.global_seed = j.value("global_seed", f.global_seed);
    f.nonviable_loss_threshold = j.value("nonviable_loss_threshold", f.nonviable_loss_threshold);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("generating factors: ") + e.what());
  }
  return f;
}

json to_json(const ModelConfig& c) {
  return {{"init", std::string(nn::to_string(c.init))},
          {"activation", std::string(nn::to_string(c.activation))},
          {"optimizer", std::string(nn::to_string(c.optimizer.kind))},
          {"learning_rate", c.optimizer.learning_rate},
          {"weight_decay", c.optimizer.weight_decay},
          {"seed", c.seed},
          {"node", c.node}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.init = nn::parse_init_method(j.at("init").get<std::string>());
  c.activation = nn::parse_activation(j.at("activation").get<std::string>());
  c.optimizer.kind = nn::parse_optimizer(j.at("optimizer").get<std::string>());
  c.optimizer.learning_rate = j.at("learning_rate").get<double>();
  c.optimizer.weight_decay = j.at("weight_decay").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.node = j.at("node").get<std::size_t>();
  return c;
}

json to_json(const symmetry::PermutationSet& p) { return p.layers; }

symmetry::PermutationSet permutation_from_json(const json& j) {
  return {j.get<std::vector<std::vector<std::size_t>>>()};
}

void save_zoo(const Zoo& zoo, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "weights", ec);
  require(!ec, ErrorKind::kIo, "cannot create " + (dir / "weights").string());
  json index;
  index["format"] = "hyperzoo-zoo/1";
  index["factors"] = to_json(zoo.factors);
  index["models"] = json::array();
  for (const auto& t : zoo.models) {
    json m;
    m["model_id"] = t.model_id;
    m["config"] = to_json(t.config);
    m["split"] = std::string(to_string(t.split));
    if (t.alignment) m["alignment"] = to_json(*t.alignment);
    if (!t.provenance.is_null()) m["provenance"] = t.provenance;
    m["checkpoints"] = json::array();
    for (const auto& c : t.checkpoints) {
      const std::string file = WeightFile(t.model_id, c.epoch);
      write_f32_le(dir / file, c.weights.flat());
      m["checkpoints"].push_back({{"epoch", c.epoch},
                                  {"viable", c.viable},
                                  {"metrics", MetricsJson(c.metrics)},
                                  {"file", file},
                                  {"length", c.weights.size()}});
    }
    index["models"].push_back(std::move(m));
  }
  std::ofstream out(dir / "index.json");
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write index in " + dir.string());
  out << index.dump(1) << "\n";
}

Zoo load_zoo(const fs::path& dir) {
  std::ifstream in(dir / "index.json");
  require(static_cast<bool>(in), ErrorKind::kIo, "missing zoo index: " + (dir / "index.json").string());
  json index;
  try {
    index = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("zoo index: ") + e.what());
  }
  Zoo zoo;
  try {
    zoo.factors = factors_from_json(index.at("factors"));
    for (const auto& m : index.at("models")) {
      Trajectory t;
      t.model_id = m.at("model_id").get<std::size_t>();
      t.config = model_config_from_json(m.at("config"));
      t.split = parse_split(m.at("split").get<std::string>());
      if (m.contains("alignment")) t.alignment = permutation_from_json(m.at("alignment"));
      if (m.contains("provenance")) t.provenance = m.at("provenance");
      const auto arch = zoo.architecture_of(t);
      for (const auto& c : m.at("checkpoints")) {
        Checkpoint cp;
        cp.epoch = c.at("epoch").get<std::size_t>();
        cp.viable = c.at("viable").get<bool>();
        cp.metrics = MetricsFrom(c.at("metrics"));
        const auto flat = read_f32_le(dir / c.at("file").get<std::string>(),
                                      c.at("length").get<std::size_t>());
        cp.weights = nn::ModelWeights::unflatten(flat, arch);
        t.checkpoints.push_back(std::move(cp));
      }
      zoo.models.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("zoo index: ") + e.what());
  }
  return zoo;
}

}  // namespace hz::zoo
