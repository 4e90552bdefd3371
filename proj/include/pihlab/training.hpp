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

// Supervised training of the sequence models on dataset rows: one Adam
// update per model per batch, uniform batch sampling, held-out tracking.

#ifndef PIHLAB_TRAINING_HPP_
#define PIHLAB_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pihlab/datagen.hpp"
#include "pihlab/nn.hpp"
#include "pihlab/seqmodel.hpp"

namespace pihlab {

struct TrainConfig {
  std::int64_t steps = 20000;
  int batch_size = 64;
  double lr = 5e-4;
  std::uint64_t seed = 7;
  std::int64_t log_every = 500;
  std::int64_t checkpoint_every = 5000;  // 0 disables periodic checkpoints
  double holdout_fraction = 0.1;         // share of trajectories held out
  int eval_rows = 1024;                  // held-out rows scored per log point

  void validate() const;
};

struct TrainReport {
  std::int64_t step = 0;
  double loss_gt = 0.0;
  double loss_fp = 0.0;
  double grad_norm_gt = 0.0;
  double grad_norm_fp = 0.0;
  double wall_time_s = 0.0;
};

struct ModelStep {
  std::vector<double> head_losses;  // before the update
  double loss = 0.0;                // sum of head losses
  double grad_norm = 0.0;
};

// One Adam update of `model` on `rows`. Throws Error(kNumeric) on a
// non-finite loss or gradient.
ModelStep optimize_step(SeqModel& model, nn::Adam& opt,
                        std::span<const DatasetRow> rows);

// One update of each of the gain tuner and force planner on the same batch.
TrainReport train_step(SeqModel& gt, SeqModel& fp, nn::Adam& gt_opt,
                       nn::Adam& fp_opt, std::span<const DatasetRow> batch);

// Rows split by trajectory so held-out rows never share an episode with
// training rows. A fraction of 0 leaves the held-out set empty.
struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> heldout;
};
DataSplit split_dataset(const Dataset& data, double holdout_fraction,
                        std::uint64_t seed);

// Per-head losses over the given rows: `normalized` is the training
// objective (errors in units of the target std), `raw` the plain mean
// squared error summed over the head's dimensions. NaN without rows.
struct HeadLosses {
  std::vector<double> normalized;
  std::vector<double> raw;
};
HeadLosses evaluate_losses(const SeqModel& model, const Dataset& data,
                           std::span<const std::size_t> rows);

struct LossPoint {
  std::int64_t step = 0;
  std::vector<double> train;    // per model, mean over the log interval
  std::vector<double> heldout;  // per model, NaN when no held-out rows
  std::vector<double> heldout_raw;
};

struct TrainHooks {
  // Called after every logged point.
  std::function<void(const LossPoint&)> on_log;
  // Called at every checkpoint interval and after the last step.
  std::function<void(std::int64_t step)> on_checkpoint;
};

struct TrainResult {
  std::vector<LossPoint> curve;  // first point is step 0 (initialization)
  std::vector<TrainReport> reports;
  std::int64_t steps = 0;
};

// Trains every model on the same sequence of batches drawn uniformly with
// replacement from split.train. Deterministic given config.seed.
TrainResult train_models(std::span<SeqModel* const> models, const Dataset& data,
                         const DataSplit& split, const TrainConfig& config,
                         const TrainHooks& hooks = {});

// Gain tuner and force planner trained together.
TrainResult train(SeqModel& gt, SeqModel& fp, const Dataset& data,
                  const TrainConfig& config, const TrainHooks& hooks = {});

}  // namespace pihlab

#endif  // PIHLAB_TRAINING_HPP_
