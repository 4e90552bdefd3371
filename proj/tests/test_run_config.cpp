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

#include <fstream>

#include "doctest.h"
#include "pihlab/error.hpp"
#include "pihlab/run_config.hpp"
#include "test_util.hpp"

using namespace pihlab;
using pihlab::testing::error_kind;

TEST_CASE("run config round-trips through JSON losslessly") {
  RunConfig c;
  c.seed = 1234567890123ULL;
  c.out = "some/dir";
  c.collect.episodes = 17;
  c.collect.augment.scale_min = 0.35;
  c.train.model.hidden = {32, 16, 8};
  c.train.model.backbone = Backbone::kCausalAttention;
  c.train.train.lr = 1.0 / 3.0;
  c.train.joint_baseline = false;
  c.eval.target_return = -0.1 / 3.0;
  c.eval.presets = {"negative_005"};
  c.ablate.factors = {0.0, 0.1, 0.7};
  c.finetune.lr_divisor = 7.0;
  const nlohmann::json j = run_config_to_json(c);
  const RunConfig back = run_config_from_json(j);
  CHECK(run_config_to_json(back) == j);
  CHECK(back.eval.target_return.value() == c.eval.target_return.value());
  CHECK(back.train.train.lr == c.train.train.lr);
  CHECK(back.seed == c.seed);
  // The text form round-trips too.
  CHECK(run_config_to_json(run_config_from_json(nlohmann::json::parse(j.dump()))) == j);
}

TEST_CASE("partial configs keep defaults and unknown keys are rejected") {
  const RunConfig c = run_config_from_json(nlohmann::json::parse(R"({"seed": 5, "eval": {"episodes": 3}})"));
  CHECK(c.seed == 5);
  CHECK(c.eval.episodes == 3);
  CHECK(c.eval.presets == EvalSettings{}.presets);
  CHECK(c.train.train.steps == 20000);
  CHECK(c.train.model.window == 20);
  CHECK(c.train.model.embed_width == 128);
  CHECK(c.train.train.batch_size == 64);
  CHECK(c.train.train.lr == 5e-4);
  CHECK(error_kind([] { run_config_from_json(nlohmann::json::parse(R"({"sede": 5})")); }) ==
        ErrorKind::kUsage);
  CHECK(error_kind([] { run_config_from_json(nlohmann::json::parse(R"({"eval": {"episodez": 5}})")); }) ==
        ErrorKind::kUsage);
  CHECK(error_kind([] { run_config_from_json(nlohmann::json::parse(R"({"seed": "x"})")); }) ==
        ErrorKind::kUsage);
}

TEST_CASE("flag overrides land per command and win over file values") {
  RunConfig c;
  FlagOverrides f;
  f.episodes = 7;
  f.steps = 11;
  f.seed = 3;
  apply_overrides(c, "collect", f);
  CHECK(c.collect.episodes == 7);
  CHECK(c.eval.episodes == 50);
  CHECK(c.train.train.steps == 11);
  CHECK(c.seed == 3);

  RunConfig e;
  FlagOverrides g;
  g.episodes = 2;
  g.presets = std::vector<std::string>{"clearance_002", "negative_005"};
  g.policies = std::vector<std::string>{"fp_gt"};
  apply_overrides(e, "eval", g);
  CHECK(e.eval.episodes == 2);
  CHECK(e.eval.presets.size() == 2);
  CHECK(e.eval.policies == std::vector<std::string>{"fp_gt"});

  RunConfig ft;
  FlagOverrides h;
  h.steps = 0;
  h.episodes = 4;
  apply_overrides(ft, "finetune", h);
  CHECK(ft.finetune.steps == 0);
  CHECK(ft.finetune.episodes == 4);
  CHECK(ft.train.train.steps == 20000);

  RunConfig bad;
  FlagOverrides p;
  p.policies = std::vector<std::string>{"fp_gt"};
  CHECK(error_kind([&] { apply_overrides(bad, "collect", p); }) == ErrorKind::kUsage);
  FlagOverrides q;
  q.presets = std::vector<std::string>{"a", "b"};
  CHECK(error_kind([&] { apply_overrides(bad, "collect", q); }) == ErrorKind::kUsage);
  FlagOverrides r;
  r.episodes = -1;
  CHECK(error_kind([&] { apply_overrides(bad, "collect", r); }) == ErrorKind::kUsage);
}

TEST_CASE("derived paths default under the output directory") {
  RunConfig c;
  c.out = "runs/a";
  CHECK(c.dataset_manifest() == "runs/a/collect/manifest.json");
  CHECK(c.models_dir() == "runs/a/models");
  c.train.dataset = "elsewhere/manifest.json";
  c.eval.models = "ckpts";
  CHECK(c.dataset_manifest() == "elsewhere/manifest.json");
  CHECK(c.models_dir() == "ckpts");
}

TEST_CASE("loading a config file") {
  const auto dir = pihlab::testing::scratch_dir("runcfg");
  const auto path = (dir / "c.json").string();
  std::ofstream(path) << R"({"out": "x", "collect": {"episodes": 9}})";
  const RunConfig c = load_run_config(path);
  CHECK(c.out == "x");
  CHECK(c.collect.episodes == 9);
  CHECK(error_kind([&] { load_run_config((dir / "none.json").string()); }) == ErrorKind::kIo);
  std::ofstream((dir / "bad.json").string()) << "{ not json";
  CHECK(error_kind([&] { load_run_config((dir / "bad.json").string()); }) == ErrorKind::kUsage);
}

TEST_CASE("split_list drops empty items and spaces") {
  CHECK(split_list("a,b, c,,") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_list("").empty());
}
