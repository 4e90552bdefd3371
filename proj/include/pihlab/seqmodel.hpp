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

// Gain tuner, force planner and joint baseline. All three share one
// windowed regressor: each input stream is embedded per slot by its own
// linear map, the slot embeddings are summed with a learned slot embedding,
// and a backbone maps the slot tokens to bounded or affine output heads.
//
//   gain tuner:    (x, v, dx) | k | f^d        ->  k
//   force planner: (x, v, f)  | (dx, f^d) | R  ->  dx, f^d
//   joint:         (x, v, f)  | (dx, k)   | R  ->  dx, k
//
// Slot j < window holds history step t - window + j; the last slot holds
// the current step, where streams without a current value are masked.

#ifndef PIHLAB_SEQMODEL_HPP_
#define PIHLAB_SEQMODEL_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pihlab/datagen.hpp"
#include "pihlab/envsim.hpp"
#include "pihlab/nn.hpp"

namespace pihlab {

enum class ModelKind { kGainTuner, kForcePlanner, kJoint };
enum class Backbone { kWindowedMlp, kCausalAttention };

std::string to_string(ModelKind kind);
std::string to_string(Backbone backbone);
ModelKind model_kind_from_string(const std::string& s);
Backbone backbone_from_string(const std::string& s);

struct ModelConfig {
  int window = 20;
  int embed_width = 128;
  Backbone backbone = Backbone::kWindowedMlp;
  int slot_width = 8;  // per-slot projection ahead of the windowed MLP
  std::vector<int> hidden{64, 64};
  ActionBounds bounds;
  std::uint64_t init_seed = 1;

  void validate() const;
};

struct StreamSpec {
  std::string name;
  int dim = 0;
  bool has_current = false;
};

struct HeadSpec {
  std::string name;
  int dim = 0;
  bool bounded = false;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

// Raw (unnormalized) inputs for `batch` samples. Column b * slots + j of a
// stream matrix is slot j of sample b.
struct ModelBatch {
  int batch = 0;
  int slots = 0;
  std::vector<Eigen::MatrixXd> streams;
  std::vector<Eigen::RowVectorXd> masks;
};

// Frozen affine statistics: inputs are mapped to (raw - mean) / std, affine
// heads emit mean + std * y, and every head's loss is measured in units of
// its target std.
struct Normalization {
  std::vector<Eigen::VectorXd> stream_mean;
  std::vector<Eigen::VectorXd> stream_std;
  std::vector<Eigen::VectorXd> head_mean;
  std::vector<Eigen::VectorXd> head_std;
};

class SeqModel {
 public:
  SeqModel(ModelKind kind, ModelConfig config);

  ModelKind kind() const { return kind_; }
  const ModelConfig& config() const { return config_; }
  const std::vector<StreamSpec>& streams() const { return streams_; }
  const std::vector<HeadSpec>& heads() const { return heads_; }
  int slots() const { return config_.window + 1; }

  nn::Parameters& parameters() { return params_; }
  const nn::Parameters& parameters() const { return params_; }
  const Normalization& normalization() const { return norm_; }
  void set_normalization(Normalization norm);

  ModelBatch make_batch(int batch) const;

  // Per-head outputs (dim x batch) in target units.
  std::vector<Eigen::MatrixXd> predict(const ModelBatch& batch) const;

  // Per-head mean over the batch of the squared normalized error. When grad
  // is non-null it receives d(sum of head losses)/d(parameters).
  std::vector<double> loss(const ModelBatch& batch,
                           const std::vector<Eigen::MatrixXd>& targets,
                           Eigen::VectorXd* grad = nullptr) const;

 private:
  struct Cache;

  void build();
  void forward(const ModelBatch& batch, Cache& cache) const;

  ModelKind kind_;
  ModelConfig config_;
  std::vector<StreamSpec> streams_;
  std::vector<HeadSpec> heads_;
  nn::Parameters params_;
  Normalization norm_;
  // Tensor ids.
  std::vector<int> embed_w_, embed_b_;
  int slot_embed_ = -1;
  int proj_w_ = -1, proj_b_ = -1;             // windowed MLP
  int att_q_ = -1, att_k_ = -1, att_v_ = -1;  // causal attention
  int att_o_ = -1;
  std::vector<int> hidden_w_, hidden_b_;
  std::vector<int> head_w_, head_b_;
};

// Encoders for single samples. `b` is the sample column in `batch`.
void encode_gt(const SeqModel& model, ModelBatch& batch, int b,
               const GtWindow& window, const Vec3& x, const Vec3& v,
               const Vec3& dx, const Vec3& f_next);
void encode_fp(const SeqModel& model, ModelBatch& batch, int b,
               const FpWindow& window, const Vec3& x, const Vec3& v,
               const Vec3& f, double rtg);
void encode_joint(const SeqModel& model, ModelBatch& batch, int b,
                  const WindowPair& windows, const Vec3& x, const Vec3& v,
                  const Vec3& f, double rtg);

// Gain tuner: k_hat in [k_min, k_max].
Vec3 gt_forward(const SeqModel& gt, const GtWindow& window, const Vec3& x,
                const Vec3& v, const Vec3& dx, const Vec3& f_next);

struct PlannerOutput {
  Vec3 dx;
  Vec3 f_next;
};
PlannerOutput fp_forward(const SeqModel& fp, const FpWindow& window,
                         const Vec3& x, const Vec3& v, const Vec3& f,
                         double rtg);

struct JointOutput {
  Vec3 dx;
  Vec3 k;
};
JointOutput joint_forward(const SeqModel& joint, const WindowPair& windows,
                          const Vec3& x, const Vec3& v, const Vec3& f,
                          double rtg);

// Inputs and targets for dataset rows (rows must carry windows).
ModelBatch encode_rows(const SeqModel& model,
                       std::span<const DatasetRow> rows);
std::vector<Eigen::MatrixXd> targets_for(const SeqModel& model,
                                         std::span<const DatasetRow> rows);

// Statistics over every step of the dataset's trajectories (inputs) and its
// rows (targets).
Normalization fit_normalization(const SeqModel& model, const Dataset& data);

}  // namespace pihlab

#endif  // PIHLAB_SEQMODEL_HPP_
