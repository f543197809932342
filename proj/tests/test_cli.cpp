// Copyright 2026 The Bystander Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scenario.hpp"

namespace bystander::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bystander_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run(const json& cfg, const fs::path& out, unsigned threads = 1, std::string* err_text = nullptr) {
  std::ostringstream err;
  RunOptions opt;
  opt.out_dir = out;
  opt.threads = threads;
  const int code = run_config_text(cfg.dump(), opt, err);
  if (err_text) *err_text = err.str();
  return code;
}

json fluor(const std::string& task, double omega = 1.0) {
  return {{"schema_version", 1},
          {"model", {{"type", "fluor"}, {"gamma", 1.0}, {"omega", omega}}},
          {"time_grid", {{"start", 0.0}, {"stop", 5.0}, {"points", 11}}},
          {"task", task}};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path out = fresh_dir("errors");
  std::ostringstream err;
  EXPECT_EQ(run_config_text("{not json", {out, std::nullopt, 1}, err), kExitConfig);
  json cfg = fluor("verify");
  cfg["schema_version"] = 2;
  EXPECT_EQ(run(cfg, out), kExitConfig);
  cfg = fluor("dance");
  EXPECT_EQ(run(cfg, out), kExitConfig);
  cfg = fluor("verify");
  cfg["time_grid"] = {{"values", {0.0, 1.0, 0.5}}};
  EXPECT_EQ(run(cfg, out), kExitConfig);
  cfg = fluor("verify");
  cfg["system_state"] = {{1.0, 0.0}, {0.0, 1.0}};
  EXPECT_EQ(run(cfg, out), kExitConfig);
  cfg = fluor("cpf");
  cfg["options"] = {{"choice", {{0.9, 0.5}, {0.5, 0.5}}}, {"scheme", "random"}};
  EXPECT_EQ(run(cfg, out), kExitConfig);
  EXPECT_FALSE(fs::exists(out / "manifest.json"));
}

TEST(Cli, NonPsdRateMatrixExitsThree) {
  const fs::path out = fresh_dir("psd");
  json cfg = json::parse(R"({
    "schema_version": 1,
    "model": {
      "type": "custom", "ds": 2, "de": 2,
      "env_ops": [[[0, 0], [1, 0]], [[0, 1], [0, 0]]],
      "rate_matrix": [[1.0, 2.0], [2.0, 1.0]],
      "maps": [[[[[1, 0], [0, -1]]], [[[1, 0], [0, -1]]]],
               [[[[1, 0], [0, -1]]], [[[0, 1], [1, 0]]]]]
    },
    "time_grid": {"values": [0.0, 1.0]},
    "task": "verify"
  })");
  std::string err;
  EXPECT_EQ(run(cfg, out, 1, &err), kExitNumerical);
  EXPECT_NE(err.find("positive semidefinite"), std::string::npos) << err;
  cfg["model"]["rate_matrix"] = {{1.0, 0.0}, {0.0, 0.5}};
  EXPECT_EQ(run(cfg, out, 1, &err), kExitOk) << err;
}

TEST(Cli, VerifyRecordsHolds) {
  const fs::path out = fresh_dir("verify");
  ASSERT_EQ(run(fluor("verify"), out), kExitOk);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_TRUE(manifest.at("result").at("holds").get<bool>());
  EXPECT_EQ(manifest.at("config"), fluor("verify"));
  EXPECT_EQ(manifest.at("outputs")[0].at("fnv1a64"), checksum_hex(slurp(out / "verify.csv")));
}

TEST(Cli, EvolveHeaderNamesUnits) {
  const fs::path out = fresh_dir("evolve");
  ASSERT_EQ(run(fluor("evolve"), out), kExitOk);
  const auto rows = read_csv(out / "evolve_system.csv");
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0][0], "t_gamma");
  EXPECT_EQ(rows[0][1], "rho_s_00_re");
  EXPECT_EQ(rows[0].size(), 9u);
}

TEST(Cli, WitnessSeriesCarryDivergenceTokens) {
  const fs::path out = fresh_dir("witness");
  json cfg = fluor("witness");
  cfg["time_grid"] = {{"start", 0.0}, {"stop", 20.0}, {"points", 2001}};
  cfg["options"] = {{"omegas", {0.1, 0.25, 1.0, 10.0}}};
  ASSERT_EQ(run(cfg, out), kExitOk);
  for (int k = 0; k < 4; ++k) {
    const auto rows = read_csv(out / ("witness_rate_" + std::to_string(k) + ".csv"));
    std::size_t divs = 0;
    for (const auto& r : rows) divs += r[1] == "div" ? 1 : 0;
    if (k < 2) {
      EXPECT_EQ(divs, 0u);
    } else {
      EXPECT_GT(divs, 3u);
    }
  }
}

TEST(Cli, RandomSchemeValuesVanish) {
  for (const std::string route : {"formula", "oracle"}) {
    const fs::path out = fresh_dir("cpf_" + route);
    json cfg = fluor("cpf");
    cfg["system_state"] = "plus_y";
    cfg["options"] = {{"scheme", "random"}, {"route", route}, {"tau", 1.5}, {"y", "Y"}};
    ASSERT_EQ(run(cfg, out), kExitOk);
    const auto rows = read_csv(out / "cpf.csv");
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows[0][2], "value");
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LE(std::abs(std::stod(rows[k][2])), 1e-10);
  }
}

TEST(Cli, QrtAndMultipartiteRun) {
  const fs::path out = fresh_dir("qrt");
  json cfg = {{"schema_version", 1},
              {"model", {{"type", "multipartite"}, {"n_qubits", 2}, {"omega", 0.5}, {"string_a", "ZY"}, {"string_b", "XX"}}},
              {"system_state", "plus"},
              {"time_grid", {{"start", 0.0}, {"stop", 2.0}, {"points", 5}}},
              {"task", "qrt"},
              {"options", {{"left", "ZZ"}, {"right", {"XX", "YI"}}, {"tau", 0.5}}}};
  ASSERT_EQ(run(cfg, out), kExitOk);
  const auto rows = read_csv(out / "qrt.csv");
  EXPECT_EQ(rows[0].size(), 11u);
}

TEST(Cli, TrajectoriesAreByteIdenticalAcrossRunsAndThreads) {
  json cfg = fluor("trajectories");
  cfg["seed"] = 99;
  cfg["options"] = {{"count", 60}};
  const fs::path a = fresh_dir("traj_a"), b = fresh_dir("traj_b");
  ASSERT_EQ(run(cfg, a, 1), kExitOk);
  ASSERT_EQ(run(cfg, b, 3), kExitOk);
  for (const char* f : {"trajectories_average.csv", "waiting_times.csv", "trajectories.jsonl", "manifest.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, SeedFlagOverridesConfig) {
  json cfg = fluor("trajectories");
  cfg["seed"] = 1;
  cfg["options"] = {{"count", 10}};
  const fs::path a = fresh_dir("seed_a"), b = fresh_dir("seed_b");
  std::ostringstream err;
  RunOptions opt{a, 2, 1};
  ASSERT_EQ(run_config_text(cfg.dump(), opt, err), kExitOk);
  cfg["seed"] = 2;
  ASSERT_EQ(run(cfg, b), kExitOk);
  EXPECT_EQ(slurp(a / "trajectories.jsonl"), slurp(b / "trajectories.jsonl"));
}

TEST(Cli, BinaryExitCodes) {
  const fs::path dir = fresh_dir("binary");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "bad.json") << "{\"schema_version\": 1}";
    std::ofstream(dir / "good.json") << fluor("verify").dump();
  }
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const std::string cli = BYSTANDER_CLI_PATH;
  EXPECT_EQ(status(cli + " --out " + (dir / "o").string()), kExitConfig);
  EXPECT_EQ(status(cli + " --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), kExitConfig);
  EXPECT_EQ(status(cli + " --config " + (dir / "good.json").string() + " --out " + (dir / "o").string()), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "o" / "verify.csv"));
}

}  // namespace
}  // namespace bystander::cli
