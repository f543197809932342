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

#include <iostream>

#include <CLI11.hpp>

#include "scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bystander environment scenarios: verification, evolution, witnesses, CPF, QRT, trajectories"};
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  app.add_option("--config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Master seed, overrides the config");
  app.add_option("--threads", threads, "Worker threads for trajectory tasks")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bystander::cli::kExitConfig;
  }
  bystander::cli::RunOptions options;
  options.out_dir = out;
  if (seed_opt->count() > 0) options.seed = seed;
  options.threads = threads;
  return bystander::cli::run_config_file(config, options, std::cerr);
}
