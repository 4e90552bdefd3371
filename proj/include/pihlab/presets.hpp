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

// Named environment presets and their JSON form.

#ifndef PIHLAB_PRESETS_HPP_
#define PIHLAB_PRESETS_HPP_

#include <string>
#include <vector>

#include "json.hpp"
#include "pihlab/envsim.hpp"

namespace pihlab {

// train_nominal, train_wide, clearance_005, clearance_002, negative_005,
// shifted_friction, shifted_stiffness, shifted_scale_low, shifted_scale_high.
std::vector<std::string> preset_names();

EnvConfig preset(const std::string& name);

// Accepts a preset name or a path to a JSON file. A file may name a "base"
// preset and override any field.
EnvConfig load_env_config(const std::string& name_or_path);

nlohmann::json env_config_to_json(const EnvConfig& config);
EnvConfig env_config_from_json(const nlohmann::json& j);

}  // namespace pihlab

#endif  // PIHLAB_PRESETS_HPP_
