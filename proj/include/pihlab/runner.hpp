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

// Subcommand implementations. Each command reads and writes under
// config.out:
//
//   collect/   trajectories.jsonl, manifest.json
//   models/    gt.json, fp.json, joint.json, policy.json, ckpt/
//   train/     loss_curve.csv, joint_loss_curve.csv
//   eval/      episodes.csv, success_matrix.csv
//   ablate/    traces.csv, summary.csv
//   finetune/  fp.json, report.csv, episodes.csv, loss_curve.csv
//
// and leaves config.json (the resolved configuration) and run_info.json
// (timestamps, wall time) in its own directory. Everything except
// run_info.json is a pure function of config.json.

#ifndef PIHLAB_RUNNER_HPP_
#define PIHLAB_RUNNER_HPP_

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pihlab/run_config.hpp"

namespace pihlab {

using LogSink = std::function<void(const std::string& line)>;

struct CommandOutcome {
  nlohmann::json summary;
  std::vector<std::string> files;  // written outputs
};

std::vector<std::string> command_names();

CommandOutcome cmd_collect(const RunConfig& config, const LogSink& log);
CommandOutcome cmd_train(const RunConfig& config, const LogSink& log);
CommandOutcome cmd_eval(const RunConfig& config, const LogSink& log);
CommandOutcome cmd_ablate(const RunConfig& config, const LogSink& log);
CommandOutcome cmd_finetune(const RunConfig& config, const LogSink& log);

// Dispatches by name; throws Error(kUsage) for an unknown command.
CommandOutcome run_command(const std::string& command, const RunConfig& config,
                           const LogSink& log);

}  // namespace pihlab

#endif  // PIHLAB_RUNNER_HPP_
