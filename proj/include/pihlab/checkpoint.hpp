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

// JSON checkpoints for sequence models: configuration, frozen
// normalization and every parameter tensor. Doubles are written in
// shortest round-trip form, so a reload reproduces outputs bit for bit.

#ifndef PIHLAB_CHECKPOINT_HPP_
#define PIHLAB_CHECKPOINT_HPP_

#include <string>

#include "json.hpp"
#include "pihlab/seqmodel.hpp"

namespace pihlab {

nlohmann::json model_config_to_json(const ModelConfig& config);
// Fields absent from `j` keep their value in `base`.
ModelConfig model_config_from_json(const nlohmann::json& j,
                                   ModelConfig base = {});

nlohmann::json model_to_json(const SeqModel& model);
SeqModel model_from_json(const nlohmann::json& j);

void save_model(const std::string& path, const SeqModel& model);
// Throws Error(kIo) naming the path when it cannot be read.
SeqModel load_model(const std::string& path);

}  // namespace pihlab

#endif  // PIHLAB_CHECKPOINT_HPP_
