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

#include "pihlab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include <fmt/format.h>

#include "pihlab/error.hpp"

namespace pihlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double force_norm(const Vec3& f) { return std::hypot(f(0), f(1)); }

}  // namespace

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kFpGt: return "fp_gt";
    case PolicyKind::kJointDt: return "joint_dt";
    case PolicyKind::kFixedGain: return "fixed_gain";
    case PolicyKind::kScripted: return "scripted";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "fp_gt") return PolicyKind::kFpGt;
  if (s == "joint_dt") return PolicyKind::kJointDt;
  if (s == "fixed_gain") return PolicyKind::kFixedGain;
  if (s == "scripted") return PolicyKind::kScripted;
  throw_usage("unknown policy '" + s +
              "' (expected fp_gt, joint_dt, fixed_gain or scripted)");
}

void PolicySpec::validate() const {
  auto need = [](const SeqModel* m, ModelKind kind, const char* what) {
    if (!m) throw_usage(std::string("policy needs a ") + what);
    if (m->kind() != kind) throw_usage(std::string("policy ") + what + " has the wrong model kind");
  };
  switch (kind) {
    case PolicyKind::kFpGt:
      need(fp, ModelKind::kForcePlanner, "force planner");
      need(gt, ModelKind::kGainTuner, "gain tuner");
      break;
    case PolicyKind::kFixedGain:
      need(fp, ModelKind::kForcePlanner, "force planner");
      if (!(fixed_gain > 0.0)) {
        throw Error(ErrorKind::kInvalidGain, "fixed_gain must be positive");
      }
      break;
    case PolicyKind::kJointDt:
      need(joint, ModelKind::kJoint, "joint model");
      if (fp) need(fp, ModelKind::kForcePlanner, "force planner");
      break;
    case PolicyKind::kScripted:
      break;
  }
  if (!(force_scale >= 0.0) || !std::isfinite(force_scale)) {
    throw_usage("force_scale must be finite and >= 0");
  }
}

Rollout rollout(PegInHoleEnv& env, const PolicySpec& policy,
                double target_return, std::uint64_t seed) {
  policy.validate();
  if (!std::isfinite(target_return)) throw_usage("target return must be finite");
  Rollout out;
  Trajectory& traj = out.traj;
  traj.seed = seed;
  traj.preset = env.config().name;
  traj.policy_version =
      policy.kind == PolicyKind::kScripted ? "scripted-v1" : to_string(policy.kind);

  std::mt19937_64 prng;
  PhaseMemory memory;
  if (policy.kind == PolicyKind::kScripted) {
    prng = policy_rng(seed);
    memory = begin_episode(prng, policy.scripted);
  }

  EnvState s = env.reset(seed);
  double rtg = target_return;
  std::vector<double> returns;
  while (!s.done) {
    const int t = static_cast<int>(traj.steps.size());
    StepLog log;
    log.rtg = rtg;
    Action a;
    if (policy.kind == PolicyKind::kScripted) {
      a = scripted_policy(s, memory, prng, policy.scripted);
    } else {
      // The current step enters as a partial record so the windows come
      // from the same builder used for training rows.
      traj.steps.push_back(Step{s.x, s.v, s.f, Vec3::Zero(), Vec3::Zero(), 0.0});
      returns.push_back(rtg);
      auto windows_for = [&](const SeqModel& m) {
        return build_windows(traj, returns, t, m.config().window);
      };
      std::optional<PlannerOutput> plan;
      if (policy.fp) plan = fp_forward(*policy.fp, windows_for(*policy.fp).fp, s.x, s.v, s.f, rtg);
      switch (policy.kind) {
        case PolicyKind::kFpGt: {
          const Vec3 fd = policy.force_scale * plan->f_next;
          a.dx = plan->dx;
          a.k = gt_forward(*policy.gt, windows_for(*policy.gt).gt, s.x, s.v,
                           plan->dx, fd);
          break;
        }
        case PolicyKind::kFixedGain:
          a.dx = plan->dx;
          a.k = Vec3::Constant(policy.fixed_gain);
          break;
        case PolicyKind::kJointDt: {
          const JointOutput j = joint_forward(*policy.joint, windows_for(*policy.joint),
                                              s.x, s.v, s.f, rtg);
          a.dx = j.dx;
          a.k = j.k;
          break;
        }
        case PolicyKind::kScripted:
          break;
      }
      if (plan) {
        log.f_desired = policy.force_scale * plan->f_next;
        log.has_plan = true;
      }
      traj.steps.pop_back();
      returns.pop_back();
    }
    a = env.clamp(a);
    log.k = a.k;
    const auto result = env.step(a);
    traj.steps.push_back(Step{s.x, s.v, s.f, a.dx, a.k, result.reward});
    returns.push_back(rtg);
    out.log.push_back(log);
    rtg -= result.reward;
    s = result.state;
  }
  traj.success = s.success;
  out.final_f = s.f;
  out.final_rtg = rtg;
  return out;
}

EpisodeMetrics episode_metrics(const Rollout& r) {
  const auto& steps = r.traj.steps;
  EpisodeMetrics m;
  m.seed = r.traj.seed;
  m.preset = r.traj.preset;
  m.success = r.traj.success;
  m.steps = static_cast<int>(steps.size());
  m.episode_return = r.traj.episode_return();
  double abs_fz = 0.0;
  double kz = 0.0;
  m.peak_force = steps.empty() ? force_norm(r.final_f) : force_norm(steps[0].f);
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const Vec3& after = t + 1 < steps.size() ? steps[t + 1].f : r.final_f;
    m.peak_force = std::max(m.peak_force, force_norm(after));
    kz += steps[t].k(1);
    if (force_norm(after) <= kContactForce) continue;
    ++m.contact_steps;
    abs_fz += std::abs(after(1));
    if (r.log[t].has_plan) {
      m.sq_err += (r.log[t].f_desired - after).cwiseAbs2();
      ++m.tracked;
    }
  }
  m.mean_abs_fz = m.contact_steps ? abs_fz / m.contact_steps : 0.0;
  m.mean_kz = steps.empty() ? 0.0 : kz / static_cast<double>(steps.size());
  m.rmse = m.tracked ? Vec3((m.sq_err / m.tracked).cwiseSqrt())
                     : Vec3::Constant(kNaN);
  return m;
}

std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  return mix_seed(seed, static_cast<std::uint64_t>(episode) + 1);
}

EvalReport evaluate(std::span<const NamedPolicy> policies,
                    std::span<const EnvConfig> presets, int episodes,
                    std::uint64_t seed, double target_return) {
  if (policies.empty()) throw_usage("evaluate needs at least one policy");
  if (presets.empty()) throw_usage("evaluate needs at least one preset");
  if (episodes < 0) throw_usage("episode count must be >= 0");
  for (const auto& p : policies) p.spec.validate();

  EvalReport report;
  for (const EnvConfig& cfg : presets) {
    PegInHoleEnv env(cfg);
    for (const auto& p : policies) {
      CellSummary cell;
      cell.policy = p.name;
      cell.preset = cfg.name;
      Vec3 sq = Vec3::Zero();
      int tracked = 0;
      for (int e = 0; e < episodes; ++e) {
        const Rollout r = rollout(env, p.spec, target_return, episode_seed(seed, e));
        EpisodeMetrics m = episode_metrics(r);
        m.policy = p.name;
        m.episode = e;
        cell.success_rate += m.success ? 1.0 : 0.0;
        cell.mean_return += m.episode_return;
        cell.mean_steps += m.steps;
        sq += m.sq_err;
        tracked += m.tracked;
        report.episodes.push_back(std::move(m));
      }
      cell.episodes = episodes;
      if (episodes > 0) {
        cell.success_rate /= episodes;
        cell.mean_return /= episodes;
        cell.mean_steps /= episodes;
      }
      cell.rmse = tracked ? Vec3((sq / tracked).cwiseSqrt()) : Vec3::Constant(kNaN);
      cell.force_rmse = tracked ? std::sqrt((sq(0) + sq(1)) / tracked) : kNaN;
      report.cells.push_back(std::move(cell));
    }
  }
  std::stable_sort(report.episodes.begin(), report.episodes.end(),
                   [](const EpisodeMetrics& a, const EpisodeMetrics& b) {
                     return std::tie(a.policy, a.preset, a.episode) <
                            std::tie(b.policy, b.preset, b.episode);
                   });
  std::stable_sort(report.cells.begin(), report.cells.end(),
                   [](const CellSummary& a, const CellSummary& b) {
                     return std::tie(a.policy, a.preset) < std::tie(b.policy, b.preset);
                   });
  return report;
}

std::string episodes_csv(const EvalReport& report) {
  std::string out =
      "policy,preset,episode,seed,success,steps,return,contact_steps,"
      "rmse_x,rmse_z,rmse_theta,peak_force,mean_abs_fz,mean_kz\n";
  for (const auto& m : report.episodes) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", m.policy,
                       m.preset, m.episode, m.seed, m.success ? 1 : 0, m.steps,
                       m.episode_return, m.contact_steps, m.rmse(0), m.rmse(1),
                       m.rmse(2), m.peak_force, m.mean_abs_fz, m.mean_kz);
  }
  return out;
}

std::string success_matrix_csv(const EvalReport& report) {
  std::string out =
      "policy,preset,episodes,success_rate,mean_return,mean_steps,"
      "rmse_x,rmse_z,rmse_theta,force_rmse\n";
  for (const auto& c : report.cells) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", c.policy, c.preset,
                       c.episodes, c.success_rate, c.mean_return, c.mean_steps,
                       c.rmse(0), c.rmse(1), c.rmse(2), c.force_rmse);
  }
  return out;
}

AblationReport ablate_force_scale(const SeqModel& gt, const SeqModel& fp,
                                  const EnvConfig& env_config,
                                  std::span<const double> factors, int episodes,
                                  std::uint64_t seed, double target_return) {
  if (episodes < 0) throw_usage("episode count must be >= 0");
  for (double f : factors) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw_usage("ablation factors must be >= 0");
  }
  PegInHoleEnv env(env_config);
  AblationReport report;
  for (double factor : factors) {
    PolicySpec spec;
    spec.kind = PolicyKind::kFpGt;
    spec.fp = &fp;
    spec.gt = &gt;
    spec.force_scale = factor;
    AblationSummary s;
    s.factor = factor;
    s.episodes = episodes;
    int with_contact = 0;
    for (int e = 0; e < episodes; ++e) {
      const Rollout r = rollout(env, spec, target_return, episode_seed(seed, e));
      const EpisodeMetrics m = episode_metrics(r);
      const auto& steps = r.traj.steps;
      for (std::size_t t = 0; t < steps.size(); ++t) {
        const Vec3& after = t + 1 < steps.size() ? steps[t + 1].f : r.final_f;
        report.traces.push_back({factor, e, static_cast<int>(t), after(1),
                                 r.log[t].f_desired(1), steps[t].k(1)});
      }
      if (m.contact_steps > 0) {
        s.mean_abs_fz += m.mean_abs_fz;
        ++with_contact;
      }
      s.mean_kz += m.mean_kz;
      s.success_rate += m.success ? 1.0 : 0.0;
    }
    if (with_contact > 0) s.mean_abs_fz /= with_contact;
    if (episodes > 0) {
      s.mean_kz /= episodes;
      s.success_rate /= episodes;
    }
    report.summary.push_back(s);
  }
  return report;
}

std::string ablation_traces_csv(const AblationReport& report) {
  std::string out = "factor,episode,t,f_z_actual,f_z_desired,k_z\n";
  for (const auto& p : report.traces) {
    out += fmt::format("{},{},{},{},{},{}\n", p.factor, p.episode, p.t,
                       p.f_z_actual, p.f_z_desired, p.k_z);
  }
  return out;
}

std::string ablation_summary_csv(const AblationReport& report) {
  std::string out = "factor,episodes,mean_abs_fz,mean_kz,success_rate\n";
  for (const auto& s : report.summary) {
    out += fmt::format("{},{},{},{},{}\n", s.factor, s.episodes, s.mean_abs_fz,
                       s.mean_kz, s.success_rate);
  }
  return out;
}

SeqModel train_joint_baseline(const Dataset& data, const ModelConfig& model,
                              const TrainConfig& train, TrainResult* result) {
  if (data.empty()) throw_usage("cannot train on an empty dataset");
  SeqModel joint(ModelKind::kJoint, model);
  joint.set_normalization(fit_normalization(joint, data));
  // Same split and batch sequence as the planner/tuner pair for this seed.
  const DataSplit split = split_dataset(data, train.holdout_fraction, train.seed);
  SeqModel* models[] = {&joint};
  TrainResult r = train_models(models, data, split, train);
  if (result) *result = std::move(r);
  return joint;
}

void FinetuneConfig::validate() const {
  if (steps < 0) throw_usage("fine-tune steps must be >= 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw_usage("fine-tune lr must be positive");
  if (batch_size < 1) throw_usage("fine-tune batch_size must be >= 1");
}

TrainResult finetune_fp(SeqModel& fp, const Dataset& data,
                        const FinetuneConfig& config) {
  config.validate();
  if (fp.kind() != ModelKind::kForcePlanner) {
    throw_usage("finetune_fp expects a force planner");
  }
  if (data.empty()) throw_usage("fine-tuning needs at least one trajectory");
  DataSplit split;
  for (std::size_t i = 0; i < data.size(); ++i) split.train.push_back(i);
  TrainConfig tc;
  tc.steps = config.steps;
  tc.batch_size = config.batch_size;
  tc.lr = config.lr;
  tc.seed = config.seed;
  tc.log_every = std::max<std::int64_t>(1, config.steps / 10);
  tc.checkpoint_every = 0;
  tc.holdout_fraction = 0.0;
  SeqModel* models[] = {&fp};
  return train_models(models, data, split, tc);
}

std::vector<Trajectory> collect_scripted(const EnvConfig& env_config,
                                         int episodes, std::uint64_t seed,
                                         const ScriptedPolicyConfig& config) {
  if (episodes < 0) throw_usage("episode count must be >= 0");
  PegInHoleEnv env(env_config);
  std::vector<Trajectory> out;
  out.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    out.push_back(collect_episode(env, config, episode_seed(seed, e)));
  }
  return out;
}

}  // namespace pihlab
