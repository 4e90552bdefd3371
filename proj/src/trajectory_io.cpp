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

#include "pihlab/trajectory_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pihlab/error.hpp"

namespace pihlab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json vec(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec_from(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw_usage(std::string("trajectory field '") + key +
                "' must be a 3-vector");
  }
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

}  // namespace

json trajectory_to_json(const Trajectory& traj) {
  json steps = json::array();
  for (const auto& s : traj.steps) {
    steps.push_back({{"x", vec(s.x)},
                     {"v", vec(s.v)},
                     {"f", vec(s.f)},
                     {"dx", vec(s.dx)},
                     {"k", vec(s.k)},
                     {"r", s.r}});
  }
  return json{{"seed", traj.seed},
              {"preset", traj.preset},
              {"policy_version", traj.policy_version},
              {"success", traj.success},
              {"steps", std::move(steps)}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  try {
    t.seed = j.at("seed").get<std::uint64_t>();
    t.preset = j.value("preset", "");
    t.policy_version = j.value("policy_version", "");
    t.success = j.at("success").get<bool>();
    for (const auto& s : j.at("steps")) {
      t.steps.push_back(Step{vec_from(s, "x"), vec_from(s, "v"),
                             vec_from(s, "f"), vec_from(s, "dx"),
                             vec_from(s, "k"), s.at("r").get<double>()});
    }
  } catch (const json::exception& e) {
    throw_usage(std::string("malformed trajectory: ") + e.what());
  }
  return t;
}

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot write " + path);
  out << text;
  if (!out) throw_io("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trajectories_jsonl(const std::string& path,
                              const std::vector<Trajectory>& trajs) {
  std::string text;
  for (const auto& t : trajs) {
    text += trajectory_to_json(t).dump();
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<Trajectory> read_trajectories_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot read " + path);
  std::vector<Trajectory> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(trajectory_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw_usage(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string content_hash(const std::vector<std::string>& paths) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : paths) {
    for (unsigned char c : read_text_file(p)) {
      h ^= c;
      h *= 0x00000100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json manifest_to_json(const DatasetManifest& m) {
  const auto& a = m.augmentation;
  return json{{"format", "pihlab-dataset"},
              {"version", m.version},
              {"preset", m.preset},
              {"seed", m.seed},
              {"episodes", m.episodes},
              {"policy_version", m.policy_version},
              {"files", m.files},
              {"augmentation",
               {{"scale_min", a.scale_min},
                {"scale_max", a.scale_max},
                {"noise_std", a.noise_std},
                {"noise_lever", a.noise_lever},
                {"copies", a.copies}}},
              {"content_hash", m.content_hash},
              {"stats", m.stats.is_null() ? json::object() : m.stats}};
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  try {
    m.version = j.at("version").get<int>();
    m.preset = j.value("preset", "");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.episodes = j.at("episodes").get<int>();
    m.policy_version = j.value("policy_version", "");
    m.files = j.at("files").get<std::vector<std::string>>();
    const auto& a = j.at("augmentation");
    m.augmentation.scale_min = a.at("scale_min").get<double>();
    m.augmentation.scale_max = a.at("scale_max").get<double>();
    m.augmentation.noise_std = a.at("noise_std").get<double>();
    m.augmentation.noise_lever = a.value("noise_lever", 0.02);
    m.augmentation.copies = a.at("copies").get<int>();
    m.content_hash = j.at("content_hash").get<std::string>();
    m.stats = j.value("stats", json::object());
  } catch (const json::exception& e) {
    throw_usage(std::string("malformed dataset manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

DatasetManifest read_manifest(const std::string& path) {
  if (!fs::exists(path)) throw_io("dataset manifest not found: " + path);
  try {
    return manifest_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw_usage(path + ": " + e.what());
  }
}

std::vector<Trajectory> load_manifest_trajectories(
    const std::string& manifest_path, DatasetManifest* manifest) {
  DatasetManifest m = read_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<std::string> paths;
  for (const auto& f : m.files) {
    const fs::path p = dir / f;
    if (!fs::exists(p)) throw_io("dataset file not found: " + p.string());
    paths.push_back(p.string());
  }
  const std::string hash = content_hash(paths);
  if (hash != m.content_hash) {
    throw_usage("dataset content hash mismatch for " + manifest_path +
                ": manifest " + m.content_hash + ", files " + hash);
  }
  std::vector<Trajectory> out;
  for (const auto& p : paths) {
    auto part = read_trajectories_jsonl(p);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  if (manifest) *manifest = std::move(m);
  return out;
}

}  // namespace pihlab
