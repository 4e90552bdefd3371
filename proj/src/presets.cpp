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

#include "pihlab/presets.hpp"

#include <filesystem>
#include <fstream>

#include "pihlab/error.hpp"

namespace pihlab {
namespace {

using nlohmann::json;

// Sensor noise of the evaluation presets, N.
constexpr double kEvalSensorNoise = 0.5;

EnvConfig with_clearance(EnvConfig c, const std::string& name,
                         double clearance) {
  c.name = name;
  c.geometry.hole_width = c.geometry.peg_width + clearance;
  c.params.sensor_noise_std = kEvalSensorNoise;
  return c;
}

EnvConfig shifted(const std::string& name) {
  EnvConfig c;
  c.name = name;
  c.params.sensor_noise_std = kEvalSensorNoise;
  return c;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw_usage("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"train_nominal",     "train_wide",         "clearance_005",
          "clearance_002",     "negative_005",       "shifted_friction",
          "shifted_stiffness", "shifted_scale_low", "shifted_scale_high"};
}

EnvConfig preset(const std::string& name) {
  EnvConfig nominal;
  if (name == "train_nominal") return nominal;
  if (name == "train_wide") {
    EnvConfig c = with_clearance(nominal, name, 0.5e-3);
    c.params.sensor_noise_std = 0.0;
    return c;
  }
  if (name == "clearance_005") return with_clearance(nominal, name, 0.05e-3);
  if (name == "clearance_002") return with_clearance(nominal, name, 0.02e-3);
  if (name == "negative_005") return with_clearance(nominal, name, -0.05e-3);
  if (name == "shifted_friction") {
    EnvConfig c = shifted(name);
    c.params.friction_mu *= 2.0;
    return c;
  }
  if (name == "shifted_stiffness") {
    EnvConfig c = shifted(name);
    c.params.contact_stiffness *= 3.0;
    return c;
  }
  if (name == "shifted_scale_low") {
    EnvConfig c = shifted(name);
    c.params.force_scale = 0.5;
    return c;
  }
  if (name == "shifted_scale_high") {
    EnvConfig c = shifted(name);
    c.params.force_scale = 1.5;
    return c;
  }
  throw_usage("unknown environment preset '" + name + "'");
}

json env_config_to_json(const EnvConfig& c) {
  const auto& g = c.geometry;
  const auto& p = c.params;
  const auto& r = c.randomization;
  return json{
      {"name", c.name},
      {"geometry",
       {{"peg_width", g.peg_width},
        {"peg_height", g.peg_height},
        {"hole_width", g.hole_width},
        {"hole_depth", g.hole_depth},
        {"hole_center_x", g.hole_center_x}}},
      {"params",
       {{"contact_stiffness", p.contact_stiffness},
        {"contact_damping", p.contact_damping},
        {"friction_mu", p.friction_mu},
        {"force_scale", p.force_scale},
        {"sensor_noise_std", p.sensor_noise_std},
        {"friction_vreg", p.friction_vreg},
        {"max_penetration", p.max_penetration},
        {"noise_lever", p.noise_lever}}},
      {"randomization",
       {{"peg_x", r.peg_x},
        {"peg_z", r.peg_z},
        {"peg_theta", r.peg_theta},
        {"hole_x", r.hole_x}}},
      {"bounds",
       {{"dx_max", vec_json(c.bounds.dx_max)},
        {"k_min", c.bounds.k_min},
        {"k_max", c.bounds.k_max}}},
      {"start_pose", vec_json(c.start_pose)},
      {"max_steps", c.max_steps},
      {"substeps", c.substeps},
      {"dt", c.dt},
      {"success_depth_tol", c.success_depth_tol},
      {"min_lateral_tol", c.min_lateral_tol},
  };
}

EnvConfig env_config_from_json(const json& j) {
  EnvConfig c;
  if (j.contains("base")) c = preset(j.at("base").get<std::string>());
  try {
    read_if(j, "name", c.name);
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      read_if(g, "peg_width", c.geometry.peg_width);
      read_if(g, "peg_height", c.geometry.peg_height);
      read_if(g, "hole_width", c.geometry.hole_width);
      read_if(g, "hole_depth", c.geometry.hole_depth);
      read_if(g, "hole_center_x", c.geometry.hole_center_x);
      if (g.contains("clearance")) {
        c.geometry.hole_width =
            c.geometry.peg_width + g.at("clearance").get<double>();
      }
    }
    if (j.contains("params")) {
      const auto& p = j.at("params");
      read_if(p, "contact_stiffness", c.params.contact_stiffness);
      read_if(p, "contact_damping", c.params.contact_damping);
      read_if(p, "friction_mu", c.params.friction_mu);
      read_if(p, "force_scale", c.params.force_scale);
      read_if(p, "sensor_noise_std", c.params.sensor_noise_std);
      read_if(p, "friction_vreg", c.params.friction_vreg);
      read_if(p, "max_penetration", c.params.max_penetration);
      read_if(p, "noise_lever", c.params.noise_lever);
    }
    if (j.contains("randomization")) {
      const auto& r = j.at("randomization");
      read_if(r, "peg_x", c.randomization.peg_x);
      read_if(r, "peg_z", c.randomization.peg_z);
      read_if(r, "peg_theta", c.randomization.peg_theta);
      read_if(r, "hole_x", c.randomization.hole_x);
    }
    if (j.contains("bounds")) {
      const auto& b = j.at("bounds");
      if (b.contains("dx_max")) c.bounds.dx_max = vec_from(b.at("dx_max"));
      read_if(b, "k_min", c.bounds.k_min);
      read_if(b, "k_max", c.bounds.k_max);
    }
    if (j.contains("start_pose")) c.start_pose = vec_from(j.at("start_pose"));
    read_if(j, "max_steps", c.max_steps);
    read_if(j, "substeps", c.substeps);
    read_if(j, "dt", c.dt);
    read_if(j, "success_depth_tol", c.success_depth_tol);
    read_if(j, "min_lateral_tol", c.min_lateral_tol);
  } catch (const json::exception& e) {
    throw_usage(std::string("environment config: ") + e.what());
  }
  c.validate();
  return c;
}

EnvConfig load_env_config(const std::string& name_or_path) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return preset(name_or_path);
  }
  if (!std::filesystem::exists(name_or_path)) {
    throw_usage("'" + name_or_path +
                "' is neither a preset name nor an existing config file");
  }
  std::ifstream in(name_or_path);
  if (!in) throw_io("cannot open environment config " + name_or_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw_usage("environment config " + name_or_path + ": " + e.what());
  }
  return env_config_from_json(j);
}

}  // namespace pihlab
