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

// Configuration of a reproducible run: one JSON document with every default
// filled in, overridable by command-line flags.

#ifndef PIHLAB_RUN_CONFIG_HPP_
#define PIHLAB_RUN_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pihlab/datagen.hpp"
#include "pihlab/seqmodel.hpp"
#include "pihlab/training.hpp"
#include "pihlab/transfer.hpp"

namespace pihlab {

struct CollectSettings {
  std::string preset = "train_nominal";  // preset name or env JSON path
  int episodes = 500;
  AugmentConfig augment;
};

struct TrainSettings {
  ModelConfig model;
  TrainConfig train;
  bool joint_baseline = true;
  std::string dataset;  // manifest path; empty means <out>/collect
};

struct EvalSettings {
  std::vector<std::string> policies{"fp_gt", "joint_dt", "fixed_gain"};
  std::vector<std::string> presets{"train_nominal", "shifted_scale_low",
                                   "shifted_scale_high", "shifted_friction",
                                   "clearance_005"};
  int episodes = 50;
  // Return-to-go at the first step. When unset, target_return_factor times
  // the best episode return of the training dataset.
  std::optional<double> target_return;
  double target_return_factor = 0.9;
  double fixed_gain = 300.0;
  std::string models;  // checkpoint directory; empty means <out>/models
};

struct AblateSettings {
  std::string preset = "train_nominal";
  std::vector<double> factors{0.0, 0.5, 1.0, 1.5, 2.0};
  int episodes = 20;
};

struct FinetuneSettings {
  std::string preset = "shifted_scale_high";
  int trajectories = 10;          // fine-tuning set
  int heldout_trajectories = 10;  // force-head check
  int episodes = 50;              // success-rate check
  std::int64_t steps = 2000;
  double lr_divisor = 5.0;  // fine-tune lr = train lr / lr_divisor
  int batch_size = 64;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out = "run";
  CollectSettings collect;
  TrainSettings train;
  EvalSettings eval;
  AblateSettings ablate;
  FinetuneSettings finetune;

  std::string dataset_manifest() const;
  std::string models_dir() const;
  void validate() const;
};

nlohmann::json run_config_to_json(const RunConfig& c);
// Keys absent from `j` keep their value in `base`; unknown keys are usage
// errors.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::string& path);

// Command-line flags. Which settings a flag lands in depends on the command.
struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<std::int64_t> steps;
  std::optional<std::vector<std::string>> presets;
  std::optional<std::vector<std::string>> policies;
  std::optional<std::string> out;
};

void apply_overrides(RunConfig& config, const std::string& command,
                     const FlagOverrides& flags);

// Splits a comma-separated list, dropping empty items.
std::vector<std::string> split_list(const std::string& s);

}  // namespace pihlab

#endif  // PIHLAB_RUN_CONFIG_HPP_
