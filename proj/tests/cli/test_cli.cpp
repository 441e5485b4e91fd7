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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "hz_cli_test";

int Run(const std::string& args) {
  const std::string cmd = std::string(HZ_CLI_PATH) + " " + args + " > " + (kRoot / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Fresh {
  Fresh() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
  }
};

}  // namespace

TEST_CASE("zoo-gen writes every checkpoint and the resolved config") {
  Fresh f;
  const auto out = kRoot / "zoo";
  REQUIRE(Run("zoo-gen --models 2 --epochs 2 --seed 4 --out " + out.string()) == 0);
  const auto index = nlohmann::json::parse(Slurp(out / "index.json"));
  REQUIRE(index["models"].size() == 2);
  std::size_t checkpoints = 0;
  for (const auto& m : index["models"]) checkpoints += m["checkpoints"].size();
  CHECK(checkpoints == 2 * 3);
  const auto cfg = nlohmann::json::parse(Slurp(out / "config.json"));
  CHECK(cfg["command"] == "zoo-gen");
  CHECK(cfg["models"] == 2);
  CHECK(cfg["seed"] == 4);
}

TEST_CASE("config file, flag precedence and HZ_OUT_ROOT") {
  Fresh f;
  {
    std::ofstream c(kRoot / "cfg.json");
    c << R"({"seed": 9, "zoo-gen": {"models": 3, "epochs": 1}})";
  }
  REQUIRE(Run("zoo-gen --config " + (kRoot / "cfg.json").string() + " --epochs 2 --out " +
              (kRoot / "z").string()) == 0);
  const auto cfg = nlohmann::json::parse(Slurp(kRoot / "z" / "config.json"));
  CHECK(cfg["seed"] == 9);
  CHECK(cfg["models"] == 3);
  CHECK(cfg["epochs"] == 2);
  REQUIRE(setenv("HZ_OUT_ROOT", (kRoot / "root").c_str(), 1) == 0);
  CHECK(Run("zoo-gen --models 1 --epochs 1") == 0);
  unsetenv("HZ_OUT_ROOT");
  CHECK(fs::exists(kRoot / "root" / "zoo-gen" / "index.json"));
}

TEST_CASE("analysis commands are idempotent and symmetry checks pass") {
  Fresh f;
  const auto zoo = (kRoot / "zoo").string();
  REQUIRE(Run("zoo-gen --models 6 --epochs 3 --out " + zoo) == 0);
  REQUIRE(Run("symmetry-verify --samples 6 --zoo " + zoo + " --out " + (kRoot / "sym").string()) == 0);
  const auto sym = Slurp(kRoot / "sym" / "symmetry.csv");
  CHECK(sym.find("FAIL") == std::string::npos);
  CHECK(sym.find("forward,6,6") != std::string::npos);
  for (const char* dir : {"a1", "a2"}) REQUIRE(Run("zoo-analyze --zoo " + zoo + " --out " + (kRoot / dir).string()) == 0);
  CHECK(Slurp(kRoot / "a1" / "diversity.csv") == Slurp(kRoot / "a2" / "diversity.csv"));
  CHECK(Slurp(kRoot / "a1" / "entropy.csv") == Slurp(kRoot / "a2" / "entropy.csv"));
  CHECK(Slurp(kRoot / "a1" / "entropy.csv").rfind("# config_hash=", 0) == 0);
  REQUIRE(Run("probe --stride 1 --zoo " + zoo + " --out " + (kRoot / "p").string()) == 0);
  CHECK(Slurp(kRoot / "p" / "probe.csv").find("s(W),eph") != std::string::npos);
}

TEST_CASE("pretrain, embed and sample round trip") {
  Fresh f;
  const auto zoo = (kRoot / "zoo").string();
  REQUIRE(Run("zoo-gen --models 6 --epochs 3 --out " + zoo) == 0);
  {
    std::ofstream c(kRoot / "ae.json");
    c << R"({"pretrain": {"epochs": 1, "ae": {"head_hidden": 8}}})";
  }
  REQUIRE(Run("pretrain --config " + (kRoot / "ae.json").string() + " --zoo " + zoo + " --out " +
              (kRoot / "pt").string()) == 0);
  const auto ae = (kRoot / "pt" / "hyperrep.hzae").string();
  CHECK(fs::exists(ae));
  CHECK(fs::exists(kRoot / "pt" / "loss_curve.csv"));
  REQUIRE(Run("embed --ae " + ae + " --zoo " + zoo + " --out " + (kRoot / "e").string()) == 0);
  CHECK(Slurp(kRoot / "e" / "embeddings.csv").find("model_id,token,z0") != std::string::npos);
  for (const char* s : {"subsample", "bootstrap", "weightspace"}) {
    const std::string args = std::string("sample --strategy ") + s + " --k 6 --m 2 --iterations 2 --finetune-epochs 1 --ae " +
                             ae + " --zoo " + zoo + " --out ";
    REQUIRE(Run(args + (kRoot / (std::string(s) + "1")).string()) == 0);
    REQUIRE(Run(args + (kRoot / (std::string(s) + "2")).string()) == 0);
    CHECK(Slurp(kRoot / (std::string(s) + "1") / "finetune.csv") == Slurp(kRoot / (std::string(s) + "2") / "finetune.csv"));
    const auto idx = nlohmann::json::parse(Slurp(kRoot / (std::string(s) + "1") / "samples" / "index.json"));
    CHECK(idx["models"].size() == 2);
  }
  CHECK(fs::exists(kRoot / "bootstrap1" / "iterations.csv"));
}

TEST_CASE("categorized failures") {
  Fresh f;
  CHECK(Run("zoo-analyze --zoo " + (kRoot / "missing").string() + " --out " + (kRoot / "x").string()) == 4);
  CHECK(Slurp(kRoot / "last.log").find("error[io]") != std::string::npos);
  {
    std::ofstream c(kRoot / "bad.json");
    c << "{not json";
  }
  CHECK(Run("zoo-gen --config " + (kRoot / "bad.json").string() + " --out " + (kRoot / "x").string()) == 3);
  CHECK(Slurp(kRoot / "last.log").find("error[parse]") != std::string::npos);
  CHECK(Run("zoo-gen --preset nope --out " + (kRoot / "x").string()) == 5);
  CHECK(Slurp(kRoot / "last.log").find("error[invalid-argument]") != std::string::npos);
  CHECK(Run("zoo-gen --no-such-flag") == 2);
  CHECK(Run("") == 2);
}
