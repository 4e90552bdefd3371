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

// Deployment: closed-loop rollouts of the learned and baseline policies,
// paired-seed evaluation across environment presets, the desired-force
// scaling ablation, and force-planner fine-tuning.

#ifndef PIHLAB_TRANSFER_HPP_
#define PIHLAB_TRANSFER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pihlab/datagen.hpp"
#include "pihlab/envsim.hpp"
#include "pihlab/scripted_policy.hpp"
#include "pihlab/seqmodel.hpp"
#include "pihlab/training.hpp"

namespace pihlab {

enum class PolicyKind { kFpGt, kJointDt, kFixedGain, kScripted };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& s);

// Models are borrowed and must outlive the PolicySpec.
struct PolicySpec {
  PolicyKind kind = PolicyKind::kFpGt;
  const SeqModel* fp = nullptr;     // fp_gt, fixed_gain; optional for joint_dt
  const SeqModel* gt = nullptr;     // fp_gt
  const SeqModel* joint = nullptr;  // joint_dt
  double fixed_gain = 300.0;        // N/m (N m/rad on theta) for fixed_gain
  double force_scale = 1.0;         // multiplies the planned desired force
  ScriptedPolicyConfig scripted;

  // Throws Error(kUsage) when a required model is missing or mismatched.
  void validate() const;
};

struct StepLog {
  Vec3 f_desired = Vec3::Zero();  // plan for the next step's force
  bool has_plan = false;
  Vec3 k = Vec3::Zero();
  double rtg = 0.0;  // return-to-go the step was conditioned on
};

struct Rollout {
  Trajectory traj;
  std::vector<StepLog> log;
  Vec3 final_f = Vec3::Zero();  // force observed after the last action
  double final_rtg = 0.0;
};

// One episode from env.reset(seed). For fp_gt the planner emits (dx, f^d),
// the tuner turns them into gains, and the return-to-go is decremented by
// each reward. Windows are rebuilt each step from the executed history with
// the same code that builds training windows. For joint_dt with a planner
// attached, the planner runs alongside to provide the reference force plan.
Rollout rollout(PegInHoleEnv& env, const PolicySpec& policy,
                double target_return, std::uint64_t seed);

// Steps whose observed next force exceeds this (N, over the force axes)
// count as contact steps for tracking metrics.
inline constexpr double kContactForce = 0.5;

struct EpisodeMetrics {
  std::string policy;
  std::string preset;
  int episode = 0;
  std::uint64_t seed = 0;
  bool success = false;
  int steps = 0;
  double episode_return = 0.0;
  int contact_steps = 0;
  Vec3 rmse = Vec3::Zero();  // per axis, NaN without a plan or contact
  double peak_force = 0.0;
  double mean_abs_fz = 0.0;  // over contact steps
  double mean_kz = 0.0;      // over all steps
  // Sums backing pooled aggregates.
  Vec3 sq_err = Vec3::Zero();
  int tracked = 0;
};

EpisodeMetrics episode_metrics(const Rollout& r);

struct CellSummary {
  std::string policy;
  std::string preset;
  int episodes = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double mean_steps = 0.0;
  Vec3 rmse = Vec3::Zero();  // pooled over contact steps of the cell
  double force_rmse = 0.0;   // pooled over the two force axes
};

struct EvalReport {
  std::vector<EpisodeMetrics> episodes;  // sorted by policy, preset, episode
  std::vector<CellSummary> cells;
};

struct NamedPolicy {
  std::string name;
  PolicySpec spec;
};

// Episode e of every cell uses seed mix_seed(seed, e), so all policies see
// the same initial pose, hole offset and sensor noise per episode index.
std::uint64_t episode_seed(std::uint64_t seed, int episode);

EvalReport evaluate(std::span<const NamedPolicy> policies,
                    std::span<const EnvConfig> presets, int episodes,
                    std::uint64_t seed, double target_return);

std::string episodes_csv(const EvalReport& report);
std::string success_matrix_csv(const EvalReport& report);

struct AblationPoint {
  double factor = 1.0;
  int episode = 0;
  int t = 0;
  double f_z_actual = 0.0;   // observed after step t
  double f_z_desired = 0.0;  // planned for after step t
  double k_z = 0.0;
};

struct AblationSummary {
  double factor = 1.0;
  int episodes = 0;
  double mean_abs_fz = 0.0;  // mean over episodes of the contact-step mean
  double mean_kz = 0.0;      // mean over episodes of the time average
  double success_rate = 0.0;
};

struct AblationReport {
  std::vector<AblationPoint> traces;
  std::vector<AblationSummary> summary;
};

AblationReport ablate_force_scale(const SeqModel& gt, const SeqModel& fp,
                                  const EnvConfig& env,
                                  std::span<const double> factors, int episodes,
                                  std::uint64_t seed, double target_return);

std::string ablation_traces_csv(const AblationReport& report);
std::string ablation_summary_csv(const AblationReport& report);

// Same architecture family and training budget as the force planner, one
// model emitting (dx, k). Normalization is fit on `data`.
SeqModel train_joint_baseline(const Dataset& data, const ModelConfig& model,
                              const TrainConfig& train,
                              TrainResult* result = nullptr);

struct FinetuneConfig {
  std::int64_t steps = 2000;
  double lr = 5e-4 / 5.0;
  int batch_size = 64;
  std::uint64_t seed = 11;

  void validate() const;
};

// Continues training the force planner on `data` (every row, frozen
// normalization). The gain tuner is not involved.
TrainResult finetune_fp(SeqModel& fp, const Dataset& data,
                        const FinetuneConfig& config);

// Scripted episodes on `env` for fine-tuning and held-out checks.
std::vector<Trajectory> collect_scripted(const EnvConfig& env, int episodes,
                                         std::uint64_t seed,
                                         const ScriptedPolicyConfig& config = {});

}  // namespace pihlab

#endif  // PIHLAB_TRANSFER_HPP_
