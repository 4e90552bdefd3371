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

#include "pihlab/run_config.hpp"

#include <filesystem>

#include "pihlab/checkpoint.hpp"
#include "pihlab/error.hpp"
#include "pihlab/trajectory_io.hpp"

namespace pihlab {

using nlohmann::json;
namespace fs = std::filesystem;

std::string RunConfig::dataset_manifest() const {
  if (!train.dataset.empty()) return train.dataset;
  return (fs::path(out) / "collect" / "manifest.json").string();
}

std::string RunConfig::models_dir() const {
  if (!eval.models.empty()) return eval.models;
  return (fs::path(out) / "models").string();
}

void RunConfig::validate() const {
  if (out.empty()) throw_usage("out directory must not be empty");
  if (collect.episodes < 0) throw_usage("collect.episodes must be >= 0");
  collect.augment.validate();
  train.model.validate();
  train.train.validate();
  if (eval.episodes < 0) throw_usage("eval.episodes must be >= 0");
  if (eval.policies.empty()) throw_usage("eval.policies must not be empty");
  for (const auto& p : eval.policies) policy_kind_from_string(p);
  if (eval.presets.empty()) throw_usage("eval.presets must not be empty");
  if (!(eval.fixed_gain > 0.0)) throw_usage("eval.fixed_gain must be positive");
  if (ablate.episodes < 0) throw_usage("ablate.episodes must be >= 0");
  for (double f : ablate.factors) {
    if (!(f >= 0.0)) throw_usage("ablate.factors must be >= 0");
  }
  if (finetune.trajectories < 1) throw_usage("finetune.trajectories must be >= 1");
  if (finetune.heldout_trajectories < 1) {
    throw_usage("finetune.heldout_trajectories must be >= 1");
  }
  if (finetune.episodes < 0) throw_usage("finetune.episodes must be >= 0");
  if (finetune.steps < 0) throw_usage("finetune.steps must be >= 0");
  if (!(finetune.lr_divisor > 0.0)) throw_usage("finetune.lr_divisor must be positive");
  if (finetune.batch_size < 1) throw_usage("finetune.batch_size must be >= 1");
}

json run_config_to_json(const RunConfig& c) {
  const auto& a = c.collect.augment;
  const auto& t = c.train.train;
  return {
      {"seed", c.seed},
      {"out", c.out},
      {"collect",
       {{"preset", c.collect.preset},
        {"episodes", c.collect.episodes},
        {"augment",
         {{"scale_min", a.scale_min},
          {"scale_max", a.scale_max},
          {"noise_std", a.noise_std},
          {"noise_lever", a.noise_lever},
          {"copies", a.copies}}}}},
      {"train",
       {{"model", model_config_to_json(c.train.model)},
        {"steps", t.steps},
        {"batch_size", t.batch_size},
        {"lr", t.lr},
        {"log_every", t.log_every},
        {"checkpoint_every", t.checkpoint_every},
        {"holdout_fraction", t.holdout_fraction},
        {"eval_rows", t.eval_rows},
        {"joint_baseline", c.train.joint_baseline},
        {"dataset", c.train.dataset}}},
      {"eval",
       {{"policies", c.eval.policies},
        {"presets", c.eval.presets},
        {"episodes", c.eval.episodes},
        {"target_return",
         c.eval.target_return ? json(*c.eval.target_return) : json(nullptr)},
        {"target_return_factor", c.eval.target_return_factor},
        {"fixed_gain", c.eval.fixed_gain},
        {"models", c.eval.models}}},
      {"ablate",
       {{"preset", c.ablate.preset},
        {"factors", c.ablate.factors},
        {"episodes", c.ablate.episodes}}},
      {"finetune",
       {{"preset", c.finetune.preset},
        {"trajectories", c.finetune.trajectories},
        {"heldout_trajectories", c.finetune.heldout_trajectories},
        {"episodes", c.finetune.episodes},
        {"steps", c.finetune.steps},
        {"lr_divisor", c.finetune.lr_divisor},
        {"batch_size", c.finetune.batch_size}}},
  };
}

namespace {

template <typename F>
void each(const json& j, const std::string& section, F&& handle) {
  if (!j.is_object()) throw_usage("config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!handle(key, value)) {
      throw_usage("unknown config key '" + section + "." + key + "'");
    }
  }
}

}  // namespace

RunConfig run_config_from_json(const json& j, RunConfig c) {
  try {
    each(j, "config", [&](const std::string& key, const json& v) {
      if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "collect") {
        each(v, key, [&](const std::string& k, const json& x) {
          if (k == "preset") c.collect.preset = x.get<std::string>();
          else if (k == "episodes") c.collect.episodes = x.get<int>();
          else if (k == "augment") {
            auto& a = c.collect.augment;
            each(x, "collect.augment", [&](const std::string& ak, const json& y) {
              if (ak == "scale_min") a.scale_min = y.get<double>();
              else if (ak == "scale_max") a.scale_max = y.get<double>();
              else if (ak == "noise_std") a.noise_std = y.get<double>();
              else if (ak == "noise_lever") a.noise_lever = y.get<double>();
              else if (ak == "copies") a.copies = y.get<int>();
              else return false;
              return true;
            });
          } else return false;
          return true;
        });
      } else if (key == "train") {
        auto& t = c.train.train;
        each(v, key, [&](const std::string& k, const json& x) {
          if (k == "model") c.train.model = model_config_from_json(x, c.train.model);
          else if (k == "steps") t.steps = x.get<std::int64_t>();
          else if (k == "batch_size") t.batch_size = x.get<int>();
          else if (k == "lr") t.lr = x.get<double>();
          else if (k == "log_every") t.log_every = x.get<std::int64_t>();
          else if (k == "checkpoint_every") t.checkpoint_every = x.get<std::int64_t>();
          else if (k == "holdout_fraction") t.holdout_fraction = x.get<double>();
          else if (k == "eval_rows") t.eval_rows = x.get<int>();
          else if (k == "joint_baseline") c.train.joint_baseline = x.get<bool>();
          else if (k == "dataset") c.train.dataset = x.get<std::string>();
          else return false;
          return true;
        });
      } else if (key == "eval") {
        each(v, key, [&](const std::string& k, const json& x) {
          if (k == "policies") c.eval.policies = x.get<std::vector<std::string>>();
          else if (k == "presets") c.eval.presets = x.get<std::vector<std::string>>();
          else if (k == "episodes") c.eval.episodes = x.get<int>();
          else if (k == "target_return") {
            if (x.is_null()) c.eval.target_return.reset();
            else c.eval.target_return = x.get<double>();
          } else if (k == "target_return_factor") {
            c.eval.target_return_factor = x.get<double>();
          } else if (k == "fixed_gain") c.eval.fixed_gain = x.get<double>();
          else if (k == "models") c.eval.models = x.get<std::string>();
          else return false;
          return true;
        });
      } else if (key == "ablate") {
        each(v, key, [&](const std::string& k, const json& x) {
          if (k == "preset") c.ablate.preset = x.get<std::string>();
          else if (k == "factors") c.ablate.factors = x.get<std::vector<double>>();
          else if (k == "episodes") c.ablate.episodes = x.get<int>();
          else return false;
          return true;
        });
      } else if (key == "finetune") {
        auto& f = c.finetune;
        each(v, key, [&](const std::string& k, const json& x) {
          if (k == "preset") f.preset = x.get<std::string>();
          else if (k == "trajectories") f.trajectories = x.get<int>();
          else if (k == "heldout_trajectories") f.heldout_trajectories = x.get<int>();
          else if (k == "episodes") f.episodes = x.get<int>();
          else if (k == "steps") f.steps = x.get<std::int64_t>();
          else if (k == "lr_divisor") f.lr_divisor = x.get<double>();
          else if (k == "batch_size") f.batch_size = x.get<int>();
          else return false;
          return true;
        });
      } else {
        return false;
      }
      return true;
    });
  } catch (const json::exception& e) {
    throw_usage(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  if (!fs::exists(path)) throw_io("config file not found: " + path);
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw_usage("cannot parse config " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

void apply_overrides(RunConfig& c, const std::string& command,
                     const FlagOverrides& flags) {
  if (flags.seed) c.seed = *flags.seed;
  if (flags.out) c.out = *flags.out;
  if (flags.steps) {
    if (command == "finetune") c.finetune.steps = *flags.steps;
    else c.train.train.steps = *flags.steps;
  }
  if (flags.episodes) {
    if (command == "collect") c.collect.episodes = *flags.episodes;
    else if (command == "ablate") c.ablate.episodes = *flags.episodes;
    else if (command == "finetune") c.finetune.episodes = *flags.episodes;
    else c.eval.episodes = *flags.episodes;
  }
  if (flags.presets) {
    const auto& p = *flags.presets;
    if (p.empty()) throw_usage("--preset needs at least one name");
    if (command == "eval") {
      c.eval.presets = p;
    } else {
      if (p.size() != 1) throw_usage("--preset takes a single preset for " + command);
      if (command == "collect") c.collect.preset = p[0];
      else if (command == "ablate") c.ablate.preset = p[0];
      else if (command == "finetune") c.finetune.preset = p[0];
      else throw_usage("--preset does not apply to " + command);
    }
  }
  if (flags.policies) {
    if (command != "eval") throw_usage("--policies applies to eval only");
    c.eval.policies = *flags.policies;
  }
  c.validate();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace pihlab
