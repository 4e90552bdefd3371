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

#include "pihlab/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "pihlab/envsim.hpp"
#include "pihlab/error.hpp"

namespace pihlab {

void TrainConfig::validate() const {
  if (steps < 0) throw_usage("training steps must be >= 0");
  if (batch_size < 1) throw_usage("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw_usage("lr must be positive");
  if (log_every < 1) throw_usage("log_every must be >= 1");
  if (checkpoint_every < 0) throw_usage("checkpoint_every must be >= 0");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw_usage("holdout_fraction must be in [0, 1)");
  }
  if (eval_rows < 1) throw_usage("eval_rows must be >= 1");
}

ModelStep optimize_step(SeqModel& model, nn::Adam& opt,
                        std::span<const DatasetRow> rows) {
  if (rows.empty()) throw_usage("training batch is empty");
  const ModelBatch batch = encode_rows(model, rows);
  const auto targets = targets_for(model, rows);
  Eigen::VectorXd grad;
  ModelStep out;
  out.head_losses = model.loss(batch, targets, &grad);
  for (double l : out.head_losses) out.loss += l;
  out.grad_norm = grad.norm();
  if (!std::isfinite(out.loss) || !std::isfinite(out.grad_norm)) {
    std::ostringstream msg;
    msg << "non-finite loss in " << to_string(model.kind())
        << " after " << opt.steps() << " updates (heads:";
    for (std::size_t i = 0; i < out.head_losses.size(); ++i) {
      msg << ' ' << model.heads()[i].name << '=' << out.head_losses[i];
    }
    msg << ", grad norm " << out.grad_norm << ")";
    throw_numeric(msg.str());
  }
  opt.step(model.parameters().flat(), grad);
  return out;
}

TrainReport train_step(SeqModel& gt, SeqModel& fp, nn::Adam& gt_opt,
                       nn::Adam& fp_opt, std::span<const DatasetRow> batch) {
  const auto start = std::chrono::steady_clock::now();
  const ModelStep g = optimize_step(gt, gt_opt, batch);
  const ModelStep f = optimize_step(fp, fp_opt, batch);
  TrainReport r;
  r.step = fp_opt.steps();
  r.loss_gt = g.loss;
  r.loss_fp = f.loss;
  r.grad_norm_gt = g.grad_norm;
  r.grad_norm_fp = f.grad_norm;
  r.wall_time_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return r;
}

DataSplit split_dataset(const Dataset& data, double holdout_fraction,
                        std::uint64_t seed) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw_usage("holdout_fraction must be in [0, 1)");
  }
  // Augmented copies share their source episode's seed; group on it so a
  // source episode never lands on both sides.
  std::map<std::pair<std::string, std::uint64_t>, std::vector<std::size_t>>
      groups;
  const auto& trajs = data.trajectories();
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    groups[{trajs[i].preset, trajs[i].seed}].push_back(i);
  }
  std::vector<std::vector<std::size_t>> order;
  for (auto& [key, members] : groups) order.push_back(std::move(members));
  std::mt19937_64 rng(mix_seed(seed, 0x73706c6974));
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t n_held = static_cast<std::size_t>(
      std::ceil(holdout_fraction * static_cast<double>(order.size())));
  if (order.size() < 2) n_held = 0;
  n_held = std::min(n_held, order.size() - std::min<std::size_t>(order.size(), 1));

  std::vector<std::uint8_t> held(trajs.size(), 0);
  for (std::size_t g = 0; g < n_held; ++g) {
    for (std::size_t i : order[g]) held[i] = 1;
  }
  DataSplit split;
  for (std::size_t r = 0; r < data.size(); ++r) {
    (held[data.row_head(r).trajectory] ? split.heldout : split.train).push_back(r);
  }
  return split;
}

HeadLosses evaluate_losses(const SeqModel& model, const Dataset& data,
                           std::span<const std::size_t> rows) {
  const std::size_t heads = model.heads().size();
  HeadLosses out{std::vector<double>(heads, 0.0), std::vector<double>(heads, 0.0)};
  if (rows.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::fill(out.normalized.begin(), out.normalized.end(), nan);
    std::fill(out.raw.begin(), out.raw.end(), nan);
    return out;
  }
  constexpr std::size_t kChunk = 256;
  const int window = model.config().window;
  std::vector<DatasetRow> chunk;
  for (std::size_t at = 0; at < rows.size(); at += kChunk) {
    const std::size_t n = std::min(kChunk, rows.size() - at);
    chunk.clear();
    for (std::size_t i = 0; i < n; ++i) chunk.push_back(data.row(rows[at + i], window));
    const auto pred = model.predict(encode_rows(model, chunk));
    const auto target = targets_for(model, chunk);
    for (std::size_t h = 0; h < heads; ++h) {
      const Eigen::MatrixXd err = pred[h] - target[h];
      out.raw[h] += err.squaredNorm();
      out.normalized[h] +=
          (err.array().colwise() / model.normalization().head_std[h].array())
              .square()
              .sum();
    }
  }
  for (std::size_t h = 0; h < heads; ++h) {
    out.raw[h] /= static_cast<double>(rows.size());
    out.normalized[h] /= static_cast<double>(rows.size());
  }
  return out;
}

namespace {

std::vector<std::size_t> strided(const std::vector<std::size_t>& rows,
                                 std::size_t limit) {
  if (rows.size() <= limit) return rows;
  std::vector<std::size_t> out;
  out.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) {
    out.push_back(rows[i * rows.size() / limit]);
  }
  return out;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TrainResult train_models(std::span<SeqModel* const> models, const Dataset& data,
                         const DataSplit& split, const TrainConfig& config,
                         const TrainHooks& hooks) {
  config.validate();
  if (models.empty()) throw_usage("no models to train");
  const int window = models[0]->config().window;
  for (SeqModel* m : models) {
    if (m->config().window != window) {
      throw_usage("jointly trained models must share the window length");
    }
  }
  if (config.steps > 0 && split.train.empty()) {
    throw_usage("training split is empty");
  }

  std::vector<nn::Adam> opts;
  for (SeqModel* m : models) {
    opts.emplace_back(m->parameters().size(), nn::AdamConfig{.lr = config.lr});
  }
  const auto eval_held = strided(split.heldout, config.eval_rows);
  const auto eval_train = strided(split.train, config.eval_rows);

  TrainResult result;
  auto heldout_point = [&](LossPoint& p) {
    for (SeqModel* m : models) {
      const HeadLosses l = evaluate_losses(*m, data, eval_held);
      p.heldout.push_back(sum(l.normalized));
      p.heldout_raw.push_back(sum(l.raw));
    }
  };
  auto report_of = [&](const LossPoint& p, const std::vector<double>& norms,
                       double wall) {
    TrainReport r;
    r.step = p.step;
    r.wall_time_s = wall;
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i]->kind() == ModelKind::kGainTuner) {
        r.loss_gt = p.train[i];
        r.grad_norm_gt = norms[i];
      } else {
        r.loss_fp = p.train[i];
        r.grad_norm_fp = norms[i];
      }
    }
    return r;
  };

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };
  {
    LossPoint p;
    for (SeqModel* m : models) {
      p.train.push_back(eval_train.empty()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : sum(evaluate_losses(*m, data, eval_train).normalized));
    }
    heldout_point(p);
    result.curve.push_back(p);
    result.reports.push_back(
        report_of(p, std::vector<double>(models.size(), 0.0), 0.0));
    if (hooks.on_log) hooks.on_log(p);
  }

  std::mt19937_64 rng(mix_seed(config.seed, 0x6261746368));
  std::uniform_int_distribution<std::size_t> pick(
      0, split.train.empty() ? 0 : split.train.size() - 1);
  std::vector<DatasetRow> batch(config.batch_size);
  std::vector<double> loss_acc(models.size(), 0.0);
  std::vector<double> norm_acc(models.size(), 0.0);
  std::int64_t acc_n = 0;
  for (std::int64_t step = 1; step <= config.steps; ++step) {
    for (auto& row : batch) row = data.row(split.train[pick(rng)], window);
    for (std::size_t i = 0; i < models.size(); ++i) {
      const ModelStep s = optimize_step(*models[i], opts[i], batch);
      loss_acc[i] += s.loss;
      norm_acc[i] += s.grad_norm;
    }
    ++acc_n;
    if (step % config.log_every == 0 || step == config.steps) {
      LossPoint p;
      p.step = step;
      std::vector<double> norms;
      for (std::size_t i = 0; i < models.size(); ++i) {
        p.train.push_back(loss_acc[i] / static_cast<double>(acc_n));
        norms.push_back(norm_acc[i] / static_cast<double>(acc_n));
      }
      heldout_point(p);
      result.curve.push_back(p);
      result.reports.push_back(report_of(p, norms, elapsed()));
      if (hooks.on_log) hooks.on_log(p);
      std::fill(loss_acc.begin(), loss_acc.end(), 0.0);
      std::fill(norm_acc.begin(), norm_acc.end(), 0.0);
      acc_n = 0;
    }
    if (hooks.on_checkpoint && config.checkpoint_every > 0 &&
        step % config.checkpoint_every == 0 && step != config.steps) {
      hooks.on_checkpoint(step);
    }
  }
  result.steps = config.steps;
  if (hooks.on_checkpoint) hooks.on_checkpoint(config.steps);
  return result;
}

TrainResult train(SeqModel& gt, SeqModel& fp, const Dataset& data,
                  const TrainConfig& config, const TrainHooks& hooks) {
  if (gt.kind() != ModelKind::kGainTuner ||
      fp.kind() != ModelKind::kForcePlanner) {
    throw_usage("train expects a gain tuner and a force planner");
  }
  if (data.empty()) throw_usage("cannot train on an empty dataset");
  const DataSplit split =
      split_dataset(data, config.holdout_fraction, config.seed);
  SeqModel* models[] = {&gt, &fp};
  return train_models(models, data, split, config, hooks);
}

}  // namespace pihlab
