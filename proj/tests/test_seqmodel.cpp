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

#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "doctest.h"
#include "oracles.hpp"
#include "pihlab/checkpoint.hpp"
#include "pihlab/error.hpp"
#include "pihlab/presets.hpp"
#include "pihlab/seqmodel.hpp"
#include "pihlab/training.hpp"
#include "pihlab/transfer.hpp"
#include "test_util.hpp"

using namespace pihlab;
using pihlab::testing::error_kind;

namespace {

constexpr ModelKind kKinds[] = {ModelKind::kGainTuner, ModelKind::kForcePlanner,
                                ModelKind::kJoint};
constexpr Backbone kBackbones[] = {Backbone::kWindowedMlp, Backbone::kCausalAttention};

const Dataset& collected() {
  static const Dataset data = build_dataset(collect_scripted(preset("train_nominal"), 20, 5));
  return data;
}

std::vector<DatasetRow> first_rows(const Dataset& d, std::size_t n, int window,
                                   std::size_t stride = 7) {
  std::vector<DatasetRow> rows;
  for (std::size_t i = 0; rows.size() < n; i = (i + stride) % d.size()) {
    rows.push_back(d.row(i, window));
  }
  return rows;
}

ModelConfig small_config(Backbone backbone = Backbone::kWindowedMlp) {
  ModelConfig c;
  c.embed_width = 32;
  c.hidden = {64, 64};
  c.slot_width = 8;
  c.backbone = backbone;
  return c;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
  for (Backbone bb : kBackbones) {
    for (ModelKind kind : kKinds) {
      CAPTURE(to_string(bb));
      CAPTURE(to_string(kind));
      const SeqModel m(kind, oracle::tiny_config(bb));
      const auto check = oracle::finite_difference_check(m, 3);
      CAPTURE(check.worst_index);
      CHECK(check.checked == m.parameters().size());
      CHECK(check.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("outputs stay within bounds for extreme inputs") {
  for (Backbone bb : kBackbones) {
    for (ModelKind kind : kKinds) {
      SeqModel m(kind, small_config(bb));
      m.set_normalization(fit_normalization(m, collected()));
      ModelBatch b = m.make_batch(64);
      std::mt19937_64 rng(9);
      std::bernoulli_distribution coin;
      for (auto& s : b.streams) {
        for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = coin(rng) ? 1e6 : -1e6;
      }
      const auto out = m.predict(b);
      for (std::size_t h = 0; h < m.heads().size(); ++h) {
        const HeadSpec& head = m.heads()[h];
        CHECK(out[h].allFinite());
        if (!head.bounded) continue;
        for (Eigen::Index c = 0; c < out[h].cols(); ++c) {
          CHECK((out[h].col(c).array() >= head.lo.array()).all());
          CHECK((out[h].col(c).array() <= head.hi.array()).all());
        }
      }
    }
  }
  const ActionBounds bounds;
  SeqModel gt(ModelKind::kGainTuner, small_config());
  SeqModel fp(ModelKind::kForcePlanner, small_config());
  CHECK(gt.heads()[0].lo == Eigen::VectorXd::Constant(3, bounds.k_min));
  CHECK(gt.heads()[0].hi == Eigen::VectorXd::Constant(3, bounds.k_max));
  CHECK(fp.heads()[0].hi == Eigen::VectorXd(bounds.dx_max));
  CHECK(fp.heads()[0].lo == Eigen::VectorXd(-bounds.dx_max));
  CHECK_FALSE(fp.heads()[1].bounded);
}

TEST_CASE("padded slots do not influence the outputs") {
  const Dataset& d = collected();
  const int h = 20;
  for (Backbone bb : kBackbones) {
    SeqModel gt(ModelKind::kGainTuner, small_config(bb));
    SeqModel fp(ModelKind::kForcePlanner, small_config(bb));
    SeqModel joint(ModelKind::kJoint, small_config(bb));
    for (SeqModel* m : {&gt, &fp, &joint}) m->set_normalization(fit_normalization(*m, d));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    auto junk = [&] { return Vec3(u(rng), u(rng), u(rng)); };
    for (int t : {0, 1, 7, 19}) {
      std::size_t longest = 0;
      for (std::size_t i = 0; i < d.trajectories().size(); ++i) {
        if (d.trajectories()[i].size() > d.trajectories()[longest].size()) longest = i;
      }
      const Trajectory& tr = d.trajectories()[longest];
      REQUIRE(static_cast<int>(tr.size()) > t + 1);
      const auto rtg = d.returns(longest);
      WindowPair w = build_windows(tr, rtg, t, h);
      WindowPair dirty = w;
      for (int j = 0; j < h; ++j) {
        if (dirty.gt.valid[j]) continue;
        dirty.gt.slots[j] = GtSlot{junk(), junk(), junk(), junk(), junk()};
        dirty.fp.slots[j] = FpSlot{junk(), junk(), junk(), junk(), junk(), u(rng)};
      }
      const Step& s = tr.steps[t];
      const Vec3 fn = tr.steps[t + 1].f;
      CHECK(gt_forward(gt, w.gt, s.x, s.v, s.dx, fn) == gt_forward(gt, dirty.gt, s.x, s.v, s.dx, fn));
      const auto a = fp_forward(fp, w.fp, s.x, s.v, s.f, rtg[t]);
      const auto b = fp_forward(fp, dirty.fp, s.x, s.v, s.f, rtg[t]);
      CHECK(a.dx == b.dx);
      CHECK(a.f_next == b.f_next);
      const auto ja = joint_forward(joint, w, s.x, s.v, s.f, rtg[t]);
      const auto jb = joint_forward(joint, dirty, s.x, s.v, s.f, rtg[t]);
      CHECK(ja.dx == jb.dx);
      CHECK(ja.k == jb.k);
      // Valid history does matter.
      if (t == 19) {
        WindowPair changed = w;
        changed.gt.slots[h - 1].f_next += Vec3(5.0, 5.0, 0.1);
        CHECK(gt_forward(gt, w.gt, s.x, s.v, s.dx, fn) !=
              gt_forward(gt, changed.gt, s.x, s.v, s.dx, fn));
      }
    }
  }
}

TEST_CASE("forward pass is a pure function") {
  const Dataset& d = collected();
  SeqModel fp(ModelKind::kForcePlanner, small_config());
  fp.set_normalization(fit_normalization(fp, d));
  const auto rows = first_rows(d, 16, 20);
  const ModelBatch b = encode_rows(fp, rows);
  const auto a = fp.predict(b);
  const auto c = fp.predict(b);
  CHECK(a[0] == c[0]);
  CHECK(a[1] == c[1]);
  // Batched and single-sample predictions agree.
  const Step& s = d.trajectories()[rows[3].trajectory].steps[rows[3].t];
  const auto one = fp_forward(fp, rows[3].fp, s.x, s.v, s.f, rows[3].rtg);
  CHECK((one.dx - Vec3(a[0].col(3))).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((one.f_next - Vec3(a[1].col(3))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact predictions give zero loss") {
  const Dataset& d = collected();
  for (ModelKind kind : kKinds) {
    SeqModel m(kind, small_config());
    m.set_normalization(fit_normalization(m, d));
    const ModelBatch b = encode_rows(m, first_rows(d, 8, 20));
    for (double l : m.loss(b, m.predict(b))) CHECK(l == 0.0);
  }
}

TEST_CASE("force planner loss is the sum of its head losses") {
  const Dataset& d = collected();
  SeqModel fp(ModelKind::kForcePlanner, small_config());
  fp.set_normalization(fit_normalization(fp, d));
  const auto rows = first_rows(d, 32, 20);
  const ModelBatch b = encode_rows(fp, rows);
  const auto targets = targets_for(fp, rows);
  const auto pred = fp.predict(b);
  const auto losses = fp.loss(b, targets);
  REQUIRE(losses.size() == 2);
  for (int h = 0; h < 2; ++h) {
    const Eigen::MatrixXd e = (pred[h] - targets[h]).array().colwise() /
                              fp.normalization().head_std[h].array();
    CHECK(losses[h] == doctest::Approx(e.squaredNorm() / 32.0).epsilon(1e-12));
  }
  // Raw loss: mean ||dx - dx_hat||^2 + mean ||f - f_hat||^2, computed apart.
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < 200; ++i) idx.push_back(i);
  const HeadLosses hl = evaluate_losses(fp, d, idx);
  std::vector<DatasetRow> all;
  for (auto i : idx) all.push_back(d.row(i, 20));
  const auto p2 = fp.predict(encode_rows(fp, all));
  double motion = 0.0, force = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    motion += (Vec3(p2[0].col(i)) - all[i].dx).squaredNorm();
    force += (Vec3(p2[1].col(i)) - all[i].f_next).squaredNorm();
  }
  CHECK(hl.raw[0] == doctest::Approx(motion / all.size()).epsilon(1e-10));
  CHECK(hl.raw[1] == doctest::Approx(force / all.size()).epsilon(1e-10));
}

TEST_CASE("shape mismatches are usage errors") {
  SeqModel gt(ModelKind::kGainTuner, small_config());
  GtWindow short_window;
  short_window.slots.resize(3);
  short_window.valid.assign(3, 1);
  const Vec3 z = Vec3::Zero();
  CHECK(error_kind([&] { gt_forward(gt, short_window, z, z, z, z); }) == ErrorKind::kUsage);
  ModelBatch b = gt.make_batch(2);
  b.streams[0].resize(1, 1);
  CHECK(error_kind([&] { gt.predict(b); }) == ErrorKind::kUsage);
  ModelConfig bad;
  bad.window = 0;
  CHECK(error_kind([&] { SeqModel(ModelKind::kGainTuner, bad); }) == ErrorKind::kUsage);
}

TEST_CASE("single-batch overfit drops every loss at least tenfold in 500 steps") {
  const Dataset& d = collected();
  const auto rows = first_rows(d, 64, 20, 13);
  for (ModelKind kind : kKinds) {
    CAPTURE(to_string(kind));
    SeqModel m(kind, ModelConfig{});
    m.set_normalization(fit_normalization(m, d));
    const auto r = oracle::overfit_single_batch(m, rows, 500, 5e-4);
    CHECK(r.final * 10.0 <= r.initial);
  }
}

TEST_CASE("gain tuner recovers a planted gain rule") {
  const Dataset d = build_dataset(oracle::planted_gain_data(1000, 30, 30.0, 1));
  SeqModel gt(ModelKind::kGainTuner, small_config());
  SeqModel fp(ModelKind::kForcePlanner, small_config());
  gt.set_normalization(fit_normalization(gt, d));
  fp.set_normalization(fit_normalization(fp, d));
  TrainConfig tc;
  tc.steps = 4000;
  tc.log_every = 4000;
  tc.checkpoint_every = 0;
  tc.lr = 1e-3;
  SeqModel* models[] = {&gt};
  const DataSplit split = split_dataset(d, 0.2, 3);
  train_models(models, d, split, tc);
  const double rel = oracle::relative_mse(gt, d, split.heldout, 0);
  MESSAGE("planted gain rule: held-out MSE / variance = " << rel);
  CHECK(rel < 0.05);
}

TEST_CASE("force planner recovers a planted affine force rule") {
  Eigen::Matrix3d a;
  a << 8.0, -3.0, 1.0, 2.0, 6.0, -4.0, 0.5, 1.0, 2.0;
  const Vec3 b(1.0, 10.0, -0.5);
  const Dataset d = build_dataset(oracle::planted_force_data(1000, 30, a, b, 2));
  SeqModel fp(ModelKind::kForcePlanner, small_config());
  fp.set_normalization(fit_normalization(fp, d));
  TrainConfig tc;
  tc.steps = 4000;
  tc.log_every = 4000;
  tc.checkpoint_every = 0;
  tc.lr = 1e-3;
  SeqModel* models[] = {&fp};
  const DataSplit split = split_dataset(d, 0.2, 3);
  train_models(models, d, split, tc);
  const double rel = oracle::relative_mse(fp, d, split.heldout, 1);
  MESSAGE("planted force rule: held-out MSE / variance = " << rel);
  CHECK(rel < 0.05);
}

TEST_CASE("training is deterministic and zero steps leave models untouched") {
  const Dataset& d = collected();
  auto run = [&](std::int64_t steps) {
    SeqModel gt(ModelKind::kGainTuner, small_config());
    SeqModel fp(ModelKind::kForcePlanner, small_config());
    gt.set_normalization(fit_normalization(gt, d));
    fp.set_normalization(fit_normalization(fp, d));
    TrainConfig tc;
    tc.steps = steps;
    tc.log_every = 10;
    tc.checkpoint_every = 0;
    const auto result = train(gt, fp, d, tc);
    return std::make_tuple(gt.parameters().flat(), fp.parameters().flat(), result.curve.size());
  };
  const SeqModel fresh(ModelKind::kGainTuner, small_config());
  const auto [g0, f0, c0] = run(0);
  CHECK(g0 == fresh.parameters().flat());
  CHECK(c0 == 1);
  const auto [g1, f1, c1] = run(30);
  const auto [g2, f2, c2] = run(30);
  CHECK(g1 == g2);
  CHECK(f1 == f2);
  CHECK(g1 != g0);
  CHECK(c1 == 4);
}

TEST_CASE("held-out split keeps augmented copies together") {
  const auto raw = collect_scripted(preset("train_nominal"), 30, 8);
  const Dataset d = build_dataset(augment_all(raw, AugmentConfig{}, 1));
  const DataSplit split = split_dataset(d, 0.2, 5);
  std::set<std::uint64_t> train_seeds, held_seeds;
  for (auto i : split.train) train_seeds.insert(d.trajectories()[d.row_head(i).trajectory].seed);
  for (auto i : split.heldout) held_seeds.insert(d.trajectories()[d.row_head(i).trajectory].seed);
  CHECK_FALSE(held_seeds.empty());
  for (auto s : held_seeds) CHECK(train_seeds.count(s) == 0);
  CHECK(split.train.size() + split.heldout.size() == d.size());
}

TEST_CASE("checkpoints reload bit-exactly") {
  const Dataset& d = collected();
  const auto dir = pihlab::testing::scratch_dir("ckpt");
  for (Backbone bb : kBackbones) {
    for (ModelKind kind : kKinds) {
      SeqModel m(kind, small_config(bb));
      m.set_normalization(fit_normalization(m, d));
      auto& theta = m.parameters().flat();
      std::mt19937_64 rng(1);
      std::normal_distribution<double> g;
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += 1e-3 * g(rng) / 3.0;
      const std::string path = (dir / (to_string(kind) + ".json")).string();
      save_model(path, m);
      const SeqModel back = load_model(path);
      CHECK(back.kind() == kind);
      CHECK(back.parameters().flat() == m.parameters().flat());
      const ModelBatch b = encode_rows(m, first_rows(d, 16, 20));
      const auto p1 = m.predict(b);
      const auto p2 = back.predict(b);
      for (std::size_t h = 0; h < p1.size(); ++h) CHECK(p1[h] == p2[h]);
    }
  }
  CHECK(error_kind([&] { load_model((dir / "missing.json").string()); }) == ErrorKind::kIo);
}
