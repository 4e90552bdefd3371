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

// Trajectory persistence (one JSON object per line) and dataset manifests.

#ifndef PIHLAB_TRAJECTORY_IO_HPP_
#define PIHLAB_TRAJECTORY_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pihlab/datagen.hpp"
#include "pihlab/trajectory.hpp"

namespace pihlab {

nlohmann::json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);

void write_trajectories_jsonl(const std::string& path,
                              const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories_jsonl(const std::string& path);

// 64-bit FNV-1a over the concatenated file contents, as 16 hex digits.
std::string content_hash(const std::vector<std::string>& paths);

struct DatasetManifest {
  int version = 1;
  std::string preset;
  std::uint64_t seed = 0;
  int episodes = 0;
  std::string policy_version;
  // Relative to the manifest's directory.
  std::vector<std::string> files;
  AugmentConfig augmentation;
  std::string content_hash;
  nlohmann::json stats;
};

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

// Reads every listed file, checking the content hash. Throws Error(kIo) on a
// missing file and Error(kUsage) on a hash mismatch.
std::vector<Trajectory> load_manifest_trajectories(
    const std::string& manifest_path, DatasetManifest* manifest = nullptr);

// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace pihlab

#endif  // PIHLAB_TRAJECTORY_IO_HPP_
