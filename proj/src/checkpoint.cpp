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

#include "pihlab/checkpoint.hpp"

#include "pihlab/error.hpp"
#include "pihlab/trajectory_io.hpp"

namespace pihlab {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json vecs_json(const std::vector<Eigen::VectorXd>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(vec_json(v));
  return a;
}

std::vector<Eigen::VectorXd> vecs_from(const json& j) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& v : j) out.push_back(vec_from(v));
  return out;
}

}  // namespace

json model_config_to_json(const ModelConfig& c) {
  return {{"window", c.window},
          {"embed_width", c.embed_width},
          {"backbone", to_string(c.backbone)},
          {"slot_width", c.slot_width},
          {"hidden", c.hidden},
          {"dx_max", vec_json(c.bounds.dx_max)},
          {"k_min", c.bounds.k_min},
          {"k_max", c.bounds.k_max},
          {"init_seed", c.init_seed}};
}

ModelConfig model_config_from_json(const json& j, ModelConfig c) {
  if (!j.is_object()) throw_usage("model config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "window") c.window = value.get<int>();
    else if (key == "embed_width") c.embed_width = value.get<int>();
    else if (key == "backbone") c.backbone = backbone_from_string(value.get<std::string>());
    else if (key == "slot_width") c.slot_width = value.get<int>();
    else if (key == "hidden") c.hidden = value.get<std::vector<int>>();
    else if (key == "dx_max") {
      if (value.size() != 3) throw_usage("model.dx_max needs 3 entries");
      c.bounds.dx_max = vec_from(value);
    } else if (key == "k_min") c.bounds.k_min = value.get<double>();
    else if (key == "k_max") c.bounds.k_max = value.get<double>();
    else if (key == "init_seed") c.init_seed = value.get<std::uint64_t>();
    else throw_usage("unknown model config key '" + key + "'");
  }
  c.validate();
  return c;
}

json model_to_json(const SeqModel& model) {
  const Normalization& n = model.normalization();
  json tensors = json::array();
  const auto& p = model.parameters();
  for (const auto& t : p.tensors()) {
    const auto view = nn::Parameters::view(p.flat(), t);
    json data = json::array();
    for (Eigen::Index i = 0; i < t.size(); ++i) data.push_back(view.data()[i]);
    tensors.push_back(
        {{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}, {"data", data}});
  }
  return {{"format", "pihlab-model"},
          {"version", kCheckpointVersion},
          {"kind", to_string(model.kind())},
          {"config", model_config_to_json(model.config())},
          {"normalization",
           {{"stream_mean", vecs_json(n.stream_mean)},
            {"stream_std", vecs_json(n.stream_std)},
            {"head_mean", vecs_json(n.head_mean)},
            {"head_std", vecs_json(n.head_std)}}},
          {"tensors", tensors}};
}

SeqModel model_from_json(const json& j) {
  try {
    if (j.at("format") != "pihlab-model") throw_usage("not a model checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw_usage("unsupported checkpoint version");
    }
    SeqModel model(model_kind_from_string(j.at("kind").get<std::string>()),
                   model_config_from_json(j.at("config")));
    const json& n = j.at("normalization");
    model.set_normalization({vecs_from(n.at("stream_mean")),
                             vecs_from(n.at("stream_std")),
                             vecs_from(n.at("head_mean")),
                             vecs_from(n.at("head_std"))});
    auto& p = model.parameters();
    const json& tensors = j.at("tensors");
    if (tensors.size() != p.tensors().size()) {
      throw_usage("checkpoint tensor count does not match the model");
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const json& t = tensors[i];
      const auto& info = p.info(static_cast<int>(i));
      if (t.at("name") != info.name || t.at("rows") != info.rows ||
          t.at("cols") != info.cols || t.at("data").size() !=
                                           static_cast<std::size_t>(info.size())) {
        throw_usage("checkpoint tensor " + info.name + " does not match the model");
      }
      double* dst = p.flat().data() + info.offset;
      for (std::size_t k = 0; k < t.at("data").size(); ++k) {
        dst[k] = t["data"][k].get<double>();
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw_usage(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_model(const std::string& path, const SeqModel& model) {
  write_text_file(path, model_to_json(model).dump() + "\n");
}

SeqModel load_model(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_usage("cannot parse checkpoint " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace pihlab
