// Copyright 2026 The pihlab Authors
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

// pihlab command-line tool. Exit codes: 0 success, 1 usage error,
// 2 runtime or numeric error.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "pihlab/pihlab.h"

namespace {

struct Flags {
  std::string config;
  std::string seed;
  std::string episodes;
  std::string steps;
  std::string preset;
  std::string policies;
  std::string out;
  bool print_config = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Run configuration JSON file");
  cmd->add_option("--seed", f.seed, "Run seed");
  cmd->add_option("--episodes", f.episodes, "Episode count");
  cmd->add_option("--steps", f.steps, "Training steps");
  cmd->add_option("--preset", f.preset, "Environment preset(s), comma separated");
  cmd->add_option("--policies", f.policies, "Policies to evaluate, comma separated");
  cmd->add_option("--out", f.out, "Run output directory");
  cmd->add_flag("--print-config", f.print_config,
                "Print the resolved configuration and exit");
}

int exit_code(pih_status s) {
  if (s == PIH_OK) return 0;
  if (s == PIH_ERR_USAGE || s == PIH_ERR_INVALID_GAIN) return 1;
  return 2;
}

int report(pih_status s) {
  std::fprintf(stderr, "pihlab: %s error: %s\n", pih_status_name(s), pih_last_error());
  return exit_code(s);
}

void print_line(const char* line, void*) {
  std::printf("%s\n", line);
  std::fflush(stdout);
}

int run(const std::string& command, const Flags& f) {
  pih_run* handle = nullptr;
  pih_status s = pih_run_create(f.config.empty() ? nullptr : f.config.c_str(), &handle);
  if (s != PIH_OK) return report(s);
  const std::pair<const char*, const std::string*> flags[] = {
      {"seed", &f.seed},         {"episodes", &f.episodes},
      {"steps", &f.steps},       {"preset", &f.preset},
      {"policies", &f.policies}, {"out", &f.out}};
  for (const auto& [key, value] : flags) {
    if (value->empty()) continue;
    s = pih_run_set_flag(handle, key, value->c_str());
    if (s != PIH_OK) break;
  }
  if (s == PIH_OK && f.print_config) {
    const char* text = pih_run_config_json(handle, command.c_str());
    if (text) std::printf("%s\n", text);
    else s = PIH_ERR_USAGE;
  } else if (s == PIH_OK) {
    pih_run_set_logger(handle, print_line, nullptr);
    s = pih_run_execute(handle, command.c_str());
  }
  const int code = s == PIH_OK ? 0 : report(s);
  pih_run_destroy(handle);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peg-in-hole admittance learning: collect, train, eval, ablate, finetune"};
  app.require_subcommand(1);
  Flags flags;
  const char* commands[][2] = {
      {"collect", "Collect scripted demonstrations and write a dataset manifest"},
      {"train", "Train the gain tuner, force planner and joint baseline"},
      {"eval", "Evaluate policies on environment presets"},
      {"ablate", "Scale the planned desired force and record force/gain traces"},
      {"finetune", "Fine-tune the force planner on a shifted environment"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return run(app.get_subcommands().front()->get_name(), flags);
}
