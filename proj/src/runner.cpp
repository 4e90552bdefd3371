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

#include "pihlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>

#include <fmt/format.h>

#include "pihlab/checkpoint.hpp"
#include "pihlab/error.hpp"
#include "pihlab/presets.hpp"
#include "pihlab/trajectory_io.hpp"

namespace pihlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Sub-streams of the run seed.
constexpr std::uint64_t kAugmentStream = 0x61756731;
constexpr std::uint64_t kTrainStream = 0x74726e31;
constexpr std::uint64_t kInitStream = 0x696e6931;
constexpr std::uint64_t kEvalStream = 0x65766c31;
constexpr std::uint64_t kAblateStream = 0x61626c31;
constexpr std::uint64_t kFinetuneStream = 0x66746e31;
constexpr std::uint64_t kFinetuneHeldStream = 0x66746831;

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// Writes the config snapshot up front and run_info.json when done.
class CommandScope {
 public:
  CommandScope(const RunConfig& config, std::string command)
      : dir_(path_in(config.out, command)),
        command_(std::move(command)),
        started_(utc_now()),
        start_(std::chrono::steady_clock::now()) {
    write_text_file(path_in(dir_, "config.json"),
                    run_config_to_json(config).dump(2) + "\n");
  }

  const std::string& dir() const { return dir_; }

  void finish(CommandOutcome& outcome) {
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
    const json info{{"command", command_},
                    {"started", started_},
                    {"finished", utc_now()},
                    {"wall_time_s", wall}};
    write_text_file(path_in(dir_, "run_info.json"), info.dump(2) + "\n");
    outcome.files.push_back(path_in(dir_, "config.json"));
    outcome.summary["wall_time_s"] = wall;
  }

 private:
  std::string dir_;
  std::string command_;
  std::string started_;
  std::chrono::steady_clock::time_point start_;
};

void emit(const LogSink& log, const std::string& line) {
  if (log) log(line);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Dataset load_training_dataset(const std::string& manifest_path,
                              DatasetManifest* manifest) {
  const auto raw = load_manifest_trajectories(manifest_path, manifest);
  return build_dataset(
      augment_all(raw, manifest->augmentation, mix_seed(manifest->seed, kAugmentStream)));
}

SeqModel load_checkpoint(const std::string& dir, const std::string& name) {
  const std::string path = path_in(dir, name);
  if (!fs::exists(path)) throw_io("checkpoint not found: " + path);
  return load_model(path);
}

double resolve_target_return(const RunConfig& c) {
  if (c.eval.target_return) return *c.eval.target_return;
  const std::string path = path_in(c.models_dir(), "policy.json");
  if (!fs::exists(path)) {
    throw_io("policy metadata not found: " + path +
             " (run train first or set eval.target_return)");
  }
  const json j = json::parse(read_text_file(path));
  return c.eval.target_return_factor * j.at("dataset_best_return").get<double>();
}

std::string loss_curve_csv(const std::vector<LossPoint>& curve,
                           const std::vector<std::string>& names) {
  std::string out = "step";
  for (const auto& n : names) out += "," + n + "_train";
  for (const auto& n : names) out += "," + n + "_heldout";
  for (const auto& n : names) out += "," + n + "_heldout_raw";
  out += "\n";
  for (const auto& p : curve) {
    out += fmt::format("{}", p.step);
    for (double v : p.train) out += fmt::format(",{}", v);
    for (double v : p.heldout) out += fmt::format(",{}", v);
    for (double v : p.heldout_raw) out += fmt::format(",{}", v);
    out += "\n";
  }
  return out;
}

ModelConfig seeded_model(const RunConfig& c) {
  ModelConfig m = c.train.model;
  m.init_seed = mix_seed(mix_seed(c.seed, kInitStream), m.init_seed);
  return m;
}

TrainConfig seeded_train(const RunConfig& c) {
  TrainConfig t = c.train.train;
  t.seed = mix_seed(mix_seed(c.seed, kTrainStream), t.seed);
  return t;
}

std::vector<EnvConfig> load_presets(const std::vector<std::string>& names) {
  std::vector<EnvConfig> out;
  for (const auto& n : names) out.push_back(load_env_config(n));
  return out;
}

}  // namespace

std::vector<std::string> command_names() {
  return {"collect", "train", "eval", "ablate", "finetune"};
}

CommandOutcome cmd_collect(const RunConfig& c, const LogSink& log) {
  c.validate();
  const EnvConfig env = load_env_config(c.collect.preset);
  CommandScope scope(c, "collect");
  CommandOutcome outcome;

  const auto trajs = collect_scripted(env, c.collect.episodes, c.seed);
  const std::string data_path = path_in(scope.dir(), "trajectories.jsonl");
  write_trajectories_jsonl(data_path, trajs);

  std::vector<double> returns;
  double length = 0.0;
  int successes = 0;
  for (const auto& t : trajs) {
    returns.push_back(t.episode_return());
    length += static_cast<double>(t.size());
    successes += t.success ? 1 : 0;
  }
  const double n = static_cast<double>(trajs.size());
  json stats{{"episodes", trajs.size()},
             {"success_fraction", trajs.empty() ? 0.0 : successes / n},
             {"mean_length", trajs.empty() ? 0.0 : length / n},
             {"return_quantiles", json::object()}};
  if (!trajs.empty()) {
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      stats["return_quantiles"][fmt::format("q{:02}", static_cast<int>(q * 100 + 0.5))] =
          quantile(returns, q);
    }
  }

  DatasetManifest m;
  m.preset = env.name;
  m.seed = c.seed;
  m.episodes = static_cast<int>(trajs.size());
  m.policy_version = "scripted-v1";
  m.files = {"trajectories.jsonl"};
  m.augmentation = c.collect.augment;
  m.content_hash = content_hash({data_path});
  m.stats = stats;
  const std::string manifest_path = path_in(scope.dir(), "manifest.json");
  write_manifest(manifest_path, m);

  emit(log, fmt::format("collected {} episodes on {}: success {:.3f}, mean length {:.1f}",
                        trajs.size(), env.name,
                        stats["success_fraction"].get<double>(),
                        stats["mean_length"].get<double>()));
  if (!trajs.empty()) {
    const auto& q = stats["return_quantiles"];
    emit(log, fmt::format("episode return q10 {:.3f} q25 {:.3f} q50 {:.3f} q75 {:.3f} q90 {:.3f}",
                          q["q10"].get<double>(), q["q25"].get<double>(),
                          q["q50"].get<double>(), q["q75"].get<double>(),
                          q["q90"].get<double>()));
  }
  outcome.summary = stats;
  outcome.files = {data_path, manifest_path};
  scope.finish(outcome);
  return outcome;
}

CommandOutcome cmd_train(const RunConfig& c, const LogSink& log) {
  c.validate();
  const std::string manifest_path = c.dataset_manifest();
  DatasetManifest manifest;
  const Dataset data = load_training_dataset(manifest_path, &manifest);
  if (data.empty()) throw_usage("dataset " + manifest_path + " has no training rows");
  CommandScope scope(c, "train");
  CommandOutcome outcome;
  const std::string models = c.models_dir();
  const ModelConfig mc = seeded_model(c);
  const TrainConfig tc = seeded_train(c);

  emit(log, fmt::format("dataset {}: {} trajectories, {} rows", manifest_path,
                        data.trajectories().size(), data.size()));
  SeqModel gt(ModelKind::kGainTuner, mc);
  SeqModel fp(ModelKind::kForcePlanner, mc);
  gt.set_normalization(fit_normalization(gt, data));
  fp.set_normalization(fit_normalization(fp, data));

  TrainHooks hooks;
  hooks.on_log = [&](const LossPoint& p) {
    emit(log, fmt::format("step {:>6}  gt {:.4f}/{:.4f}  fp {:.4f}/{:.4f}  (train/held-out)",
                          p.step, p.train[0], p.heldout[0], p.train[1], p.heldout[1]));
  };
  hooks.on_checkpoint = [&](std::int64_t step) {
    if (step == tc.steps) return;  // the final models are written below
    const std::string dir = path_in(models, "ckpt");
    save_model(path_in(dir, fmt::format("step_{:06}_gt.json", step)), gt);
    save_model(path_in(dir, fmt::format("step_{:06}_fp.json", step)), fp);
  };
  const TrainResult result = train(gt, fp, data, tc, hooks);

  save_model(path_in(models, "gt.json"), gt);
  save_model(path_in(models, "fp.json"), fp);
  const json policy{{"dataset_manifest", manifest_path},
                    {"dataset_hash", manifest.content_hash},
                    {"dataset_best_return", data.best_return()}};
  write_text_file(path_in(models, "policy.json"), policy.dump(2) + "\n");
  const std::string curve = path_in(scope.dir(), "loss_curve.csv");
  write_text_file(curve, loss_curve_csv(result.curve, {"gt", "fp"}));
  outcome.files = {path_in(models, "gt.json"), path_in(models, "fp.json"),
                   path_in(models, "policy.json"), curve};

  const LossPoint& first = result.curve.front();
  const LossPoint& last = result.curve.back();
  outcome.summary = {{"rows", data.size()},
                     {"steps", result.steps},
                     {"dataset_best_return", data.best_return()},
                     {"gt_heldout", {first.heldout[0], last.heldout[0]}},
                     {"fp_heldout", {first.heldout[1], last.heldout[1]}},
                     {"gt_heldout_raw", {first.heldout_raw[0], last.heldout_raw[0]}},
                     {"fp_heldout_raw", {first.heldout_raw[1], last.heldout_raw[1]}}};

  if (c.train.joint_baseline) {
    emit(log, "training joint baseline");
    TrainResult jr;
    const SeqModel joint = train_joint_baseline(data, mc, tc, &jr);
    save_model(path_in(models, "joint.json"), joint);
    const std::string jcurve = path_in(scope.dir(), "joint_loss_curve.csv");
    write_text_file(jcurve, loss_curve_csv(jr.curve, {"joint"}));
    outcome.files.push_back(path_in(models, "joint.json"));
    outcome.files.push_back(jcurve);
    outcome.summary["joint_heldout"] = {jr.curve.front().heldout[0],
                                        jr.curve.back().heldout[0]};
    emit(log, fmt::format("joint held-out loss {:.4f} -> {:.4f}",
                          jr.curve.front().heldout[0], jr.curve.back().heldout[0]));
  }
  scope.finish(outcome);
  return outcome;
}

namespace {

struct LoadedModels {
  std::map<std::string, std::unique_ptr<SeqModel>> by_name;
  const SeqModel* get(const std::string& dir, const std::string& name) {
    auto& slot = by_name[name];
    if (!slot) slot = std::make_unique<SeqModel>(load_checkpoint(dir, name + ".json"));
    return slot.get();
  }
};

PolicySpec make_policy(const std::string& name, const RunConfig& c,
                       LoadedModels& models) {
  const std::string dir = c.models_dir();
  PolicySpec spec;
  spec.kind = policy_kind_from_string(name);
  spec.fixed_gain = c.eval.fixed_gain;
  switch (spec.kind) {
    case PolicyKind::kFpGt:
      spec.fp = models.get(dir, "fp");
      spec.gt = models.get(dir, "gt");
      break;
    case PolicyKind::kFixedGain:
      spec.fp = models.get(dir, "fp");
      break;
    case PolicyKind::kJointDt:
      spec.joint = models.get(dir, "joint");
      // The planner, when present, supplies the reference force plan.
      if (fs::exists(path_in(dir, "fp.json"))) spec.fp = models.get(dir, "fp");
      break;
    case PolicyKind::kScripted:
      break;
  }
  return spec;
}

bool needs_models(const std::vector<std::string>& policies) {
  return std::any_of(policies.begin(), policies.end(),
                     [](const std::string& p) { return p != "scripted"; });
}

}  // namespace

CommandOutcome cmd_eval(const RunConfig& c, const LogSink& log) {
  c.validate();
  const auto presets = load_presets(c.eval.presets);
  LoadedModels models;
  std::vector<NamedPolicy> policies;
  for (const auto& p : c.eval.policies) policies.push_back({p, make_policy(p, c, models)});
  const double target = needs_models(c.eval.policies) ? resolve_target_return(c)
                                                      : c.eval.target_return.value_or(0.0);
  CommandScope scope(c, "eval");
  CommandOutcome outcome;

  const EvalReport report = evaluate(policies, presets, c.eval.episodes,
                                     mix_seed(c.seed, kEvalStream), target);
  const std::string episodes = path_in(scope.dir(), "episodes.csv");
  const std::string matrix = path_in(scope.dir(), "success_matrix.csv");
  write_text_file(episodes, episodes_csv(report));
  write_text_file(matrix, success_matrix_csv(report));

  outcome.summary = {{"target_return", target}, {"cells", json::array()}};
  for (const auto& cell : report.cells) {
    emit(log, fmt::format("{:<11} {:<20} success {:.2f}  force rmse {:.3f} N  mean steps {:.1f}",
                          cell.policy, cell.preset, cell.success_rate,
                          cell.force_rmse, cell.mean_steps));
    outcome.summary["cells"].push_back({{"policy", cell.policy},
                                        {"preset", cell.preset},
                                        {"success_rate", cell.success_rate},
                                        {"force_rmse", cell.force_rmse}});
  }
  outcome.files = {episodes, matrix};
  scope.finish(outcome);
  return outcome;
}

CommandOutcome cmd_ablate(const RunConfig& c, const LogSink& log) {
  c.validate();
  const EnvConfig env = load_env_config(c.ablate.preset);
  const SeqModel gt = load_checkpoint(c.models_dir(), "gt.json");
  const SeqModel fp = load_checkpoint(c.models_dir(), "fp.json");
  const double target = resolve_target_return(c);
  CommandScope scope(c, "ablate");
  CommandOutcome outcome;

  const AblationReport report =
      ablate_force_scale(gt, fp, env, c.ablate.factors, c.ablate.episodes,
                         mix_seed(c.seed, kAblateStream), target);
  const std::string traces = path_in(scope.dir(), "traces.csv");
  const std::string summary = path_in(scope.dir(), "summary.csv");
  write_text_file(traces, ablation_traces_csv(report));
  write_text_file(summary, ablation_summary_csv(report));
  outcome.summary = json::array();
  for (const auto& s : report.summary) {
    emit(log, fmt::format("factor {:.2f}: mean |f_z| {:.3f} N, mean k_z {:.1f} N/m, success {:.2f}",
                          s.factor, s.mean_abs_fz, s.mean_kz, s.success_rate));
    outcome.summary.push_back({{"factor", s.factor},
                               {"mean_abs_fz", s.mean_abs_fz},
                               {"mean_kz", s.mean_kz}});
  }
  outcome.summary = {{"factors", outcome.summary}};
  outcome.files = {traces, summary};
  scope.finish(outcome);
  return outcome;
}

CommandOutcome cmd_finetune(const RunConfig& c, const LogSink& log) {
  c.validate();
  const EnvConfig env = load_env_config(c.finetune.preset);
  const SeqModel gt = load_checkpoint(c.models_dir(), "gt.json");
  const SeqModel fp = load_checkpoint(c.models_dir(), "fp.json");
  const double target = resolve_target_return(c);
  CommandScope scope(c, "finetune");
  CommandOutcome outcome;

  const Dataset tune = build_dataset(collect_scripted(
      env, c.finetune.trajectories, mix_seed(c.seed, kFinetuneStream)));
  const Dataset held = build_dataset(collect_scripted(
      env, c.finetune.heldout_trajectories, mix_seed(c.seed, kFinetuneHeldStream)));
  std::vector<std::size_t> held_rows(held.size());
  for (std::size_t i = 0; i < held_rows.size(); ++i) held_rows[i] = i;

  FinetuneConfig fc;
  fc.steps = c.finetune.steps;
  fc.lr = c.train.train.lr / c.finetune.lr_divisor;
  fc.batch_size = c.finetune.batch_size;
  fc.seed = mix_seed(c.seed, kFinetuneStream);
  SeqModel tuned = fp;
  const HeadLosses before = evaluate_losses(fp, held, held_rows);
  const TrainResult tr = finetune_fp(tuned, tune, fc);
  const HeadLosses after = evaluate_losses(tuned, held, held_rows);
  save_model(path_in(scope.dir(), "fp.json"), tuned);

  PolicySpec base;
  base.fp = &fp;
  base.gt = &gt;
  PolicySpec fine = base;
  fine.fp = &tuned;
  const std::vector<NamedPolicy> policies{{"fp_gt", base}, {"fp_gt_finetuned", fine}};
  const std::vector<EnvConfig> presets{env};
  const EvalReport report = evaluate(policies, presets, c.finetune.episodes,
                                     mix_seed(c.seed, kEvalStream), target);
  const double succ_before = report.cells[0].success_rate;
  const double succ_after = report.cells[1].success_rate;

  // Force head is the planner's second head.
  std::string csv = "metric,before,after\n";
  csv += fmt::format("success_rate,{},{}\n", succ_before, succ_after);
  csv += fmt::format("force_mse_heldout,{},{}\n", before.raw[1], after.raw[1]);
  csv += fmt::format("force_mse_heldout_normalized,{},{}\n", before.normalized[1],
                     after.normalized[1]);
  csv += fmt::format("motion_mse_heldout,{},{}\n", before.raw[0], after.raw[0]);
  const std::string report_path = path_in(scope.dir(), "report.csv");
  const std::string episodes_path = path_in(scope.dir(), "episodes.csv");
  const std::string curve_path = path_in(scope.dir(), "loss_curve.csv");
  write_text_file(report_path, csv);
  write_text_file(episodes_path, episodes_csv(report));
  write_text_file(curve_path, loss_curve_csv(tr.curve, {"fp"}));

  emit(log, fmt::format("fine-tuned on {} trajectories ({} rows) of {}", c.finetune.trajectories,
                        tune.size(), env.name));
  emit(log, fmt::format("held-out force MSE {:.4f} -> {:.4f} N^2", before.raw[1], after.raw[1]));
  emit(log, fmt::format("success rate {:.2f} -> {:.2f} over {} episodes", succ_before,
                        succ_after, c.finetune.episodes));
  outcome.summary = {{"success_rate", {succ_before, succ_after}},
                     {"force_mse_heldout", {before.raw[1], after.raw[1]}}};
  outcome.files = {path_in(scope.dir(), "fp.json"), report_path, episodes_path, curve_path};
  scope.finish(outcome);
  return outcome;
}

CommandOutcome run_command(const std::string& command, const RunConfig& config,
                           const LogSink& log) {
  if (command == "collect") return cmd_collect(config, log);
  if (command == "train") return cmd_train(config, log);
  if (command == "eval") return cmd_eval(config, log);
  if (command == "ablate") return cmd_ablate(config, log);
  if (command == "finetune") return cmd_finetune(config, log);
  throw_usage("unknown command '" + command +
              "' (expected collect, train, eval, ablate or finetune)");
}

}  // namespace pihlab
