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

#include "pihlab/seqmodel.hpp"

#include <algorithm>
#include <cmath>

#include "pihlab/error.hpp"

namespace pihlab {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGainTuner: return "gain_tuner";
    case ModelKind::kForcePlanner: return "force_planner";
    case ModelKind::kJoint: return "joint";
  }
  return "unknown";
}

std::string to_string(Backbone backbone) {
  return backbone == Backbone::kWindowedMlp ? "windowed-mlp"
                                            : "tiny-causal-attention";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "gain_tuner") return ModelKind::kGainTuner;
  if (s == "force_planner") return ModelKind::kForcePlanner;
  if (s == "joint") return ModelKind::kJoint;
  throw_usage("unknown model kind '" + s + "'");
}

Backbone backbone_from_string(const std::string& s) {
  if (s == "windowed-mlp") return Backbone::kWindowedMlp;
  if (s == "tiny-causal-attention") return Backbone::kCausalAttention;
  throw_usage("unknown backbone '" + s +
              "' (expected windowed-mlp or tiny-causal-attention)");
}

void ModelConfig::validate() const {
  if (window < 1) throw_usage("model window must be >= 1");
  if (embed_width < 1) throw_usage("embed_width must be >= 1");
  if (slot_width < 1) throw_usage("slot_width must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw_usage("hidden layer widths must be >= 1");
  }
  if (!(bounds.k_min > 0.0) || !(bounds.k_max > bounds.k_min)) {
    throw_usage("gain bounds must satisfy 0 < k_min < k_max");
  }
  if (!(bounds.dx_max.array() > 0.0).all()) {
    throw_usage("dx_max must be positive");
  }
}

namespace {

double sigmoid(double y) { return 1.0 / (1.0 + std::exp(-y)); }

HeadSpec gain_head(const ActionBounds& b) {
  return {"k", 3, true, VectorXd::Constant(3, b.k_min),
          VectorXd::Constant(3, b.k_max)};
}

HeadSpec motion_head(const ActionBounds& b) {
  return {"dx", 3, true, -b.dx_max, b.dx_max};
}

}  // namespace

struct SeqModel::Cache {
  int batch = 0;
  int slots = 0;
  std::vector<MatrixXd> z;  // normalized, masked stream inputs
  RowVectorXd slot_mask;
  MatrixXd tokens;  // E x N
  // windowed MLP
  MatrixXd proj;  // C x N
  // attention
  MatrixXd q, keys, values, alpha, attended;  // alpha: L x B
  std::vector<MatrixXd> h;                    // h[0] backbone output
  std::vector<MatrixXd> y;                    // head pre-activations
  std::vector<MatrixXd> out;                  // head outputs, target units
};

SeqModel::SeqModel(ModelKind kind, ModelConfig config)
    : kind_(kind), config_(std::move(config)) {
  config_.validate();
  build();
}

void SeqModel::build() {
  const ActionBounds& b = config_.bounds;
  switch (kind_) {
    case ModelKind::kGainTuner:
      streams_ = {{"motion", 9, true}, {"gain", 3, false}, {"force", 3, true}};
      heads_ = {gain_head(b)};
      break;
    case ModelKind::kForcePlanner:
      streams_ = {{"state", 9, true}, {"action", 6, false}, {"return", 1, true}};
      heads_ = {motion_head(b), {"f_next", 3, false, {}, {}}};
      break;
    case ModelKind::kJoint:
      streams_ = {{"state", 9, true}, {"action", 6, false}, {"return", 1, true}};
      heads_ = {motion_head(b), gain_head(b)};
      break;
  }

  const int e = config_.embed_width;
  const int l = slots();
  std::mt19937_64 rng(mix_seed(config_.init_seed,
                               0x696e6974 + static_cast<std::uint64_t>(kind_)));
  for (const StreamSpec& s : streams_) {
    embed_w_.push_back(params_.add("embed." + s.name + ".w", e, s.dim));
    embed_b_.push_back(params_.add("embed." + s.name + ".b", e, 1));
  }
  slot_embed_ = params_.add("embed.slot", e, l);

  int width = 0;
  if (config_.backbone == Backbone::kWindowedMlp) {
    proj_w_ = params_.add("proj.w", config_.slot_width, e);
    proj_b_ = params_.add("proj.b", config_.slot_width, 1);
    width = config_.slot_width * l;
  } else {
    att_q_ = params_.add("attn.q", e, e);
    att_k_ = params_.add("attn.k", e, e);
    att_v_ = params_.add("attn.v", e, e);
    att_o_ = params_.add("attn.o", e, e);
    width = e;
  }
  for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
    const std::string p = "hidden" + std::to_string(i);
    hidden_w_.push_back(params_.add(p + ".w", config_.hidden[i], width));
    hidden_b_.push_back(params_.add(p + ".b", config_.hidden[i], 1));
    width = config_.hidden[i];
  }
  for (const HeadSpec& h : heads_) {
    head_w_.push_back(params_.add("head." + h.name + ".w", h.dim, width));
    head_b_.push_back(params_.add("head." + h.name + ".b", h.dim, 1));
  }

  // Initialize in registration order so the draw sequence is fixed.
  for (std::size_t s = 0; s < streams_.size(); ++s) {
    nn::glorot_uniform(params_.value(embed_w_[s]), rng);
  }
  {
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    auto p = params_.value(slot_embed_);
    for (Index j = 0; j < p.cols(); ++j) {
      for (Index i = 0; i < p.rows(); ++i) p(i, j) = u(rng);
    }
  }
  if (proj_w_ >= 0) nn::glorot_uniform(params_.value(proj_w_), rng);
  for (int id : {att_q_, att_k_, att_v_, att_o_}) {
    if (id >= 0) nn::glorot_uniform(params_.value(id), rng);
  }
  for (int id : hidden_w_) nn::glorot_uniform(params_.value(id), rng);
  // Small output weights: heads start near their midpoint or mean.
  for (int id : head_w_) nn::glorot_uniform(params_.value(id), rng, 0.1);

  norm_.stream_mean.clear();
  norm_.stream_std.clear();
  for (const StreamSpec& s : streams_) {
    norm_.stream_mean.push_back(VectorXd::Zero(s.dim));
    norm_.stream_std.push_back(VectorXd::Ones(s.dim));
  }
  for (const HeadSpec& h : heads_) {
    norm_.head_mean.push_back(VectorXd::Zero(h.dim));
    norm_.head_std.push_back(VectorXd::Ones(h.dim));
  }
}

void SeqModel::set_normalization(Normalization norm) {
  auto check = [](const std::vector<VectorXd>& v, std::size_t n, auto dim_of,
                  bool positive, const char* what) {
    if (v.size() != n) throw_usage(std::string("normalization: wrong ") + what);
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i].size() != dim_of(i) || !v[i].allFinite() ||
          (positive && !(v[i].array() > 0.0).all())) {
        throw_usage(std::string("normalization: invalid ") + what);
      }
    }
  };
  auto sdim = [this](std::size_t i) { return Index{streams_[i].dim}; };
  auto hdim = [this](std::size_t i) { return Index{heads_[i].dim}; };
  check(norm.stream_mean, streams_.size(), sdim, false, "stream mean");
  check(norm.stream_std, streams_.size(), sdim, true, "stream std");
  check(norm.head_mean, heads_.size(), hdim, false, "head mean");
  check(norm.head_std, heads_.size(), hdim, true, "head std");
  norm_ = std::move(norm);
}

ModelBatch SeqModel::make_batch(int batch) const {
  if (batch < 1) throw_usage("batch size must be >= 1");
  ModelBatch mb;
  mb.batch = batch;
  mb.slots = slots();
  const Index n = Index{batch} * mb.slots;
  for (const StreamSpec& s : streams_) {
    mb.streams.push_back(MatrixXd::Zero(s.dim, n));
    mb.masks.push_back(RowVectorXd::Zero(n));
  }
  return mb;
}

void SeqModel::forward(const ModelBatch& batch, Cache& c) const {
  if (batch.slots != slots() || batch.streams.size() != streams_.size() ||
      batch.masks.size() != streams_.size() || batch.batch < 1) {
    throw_usage("model batch does not match the model layout");
  }
  const int l = slots();
  const int nb = batch.batch;
  const Index n = Index{nb} * l;
  const int e = config_.embed_width;
  c.batch = nb;
  c.slots = l;

  c.slot_mask = RowVectorXd::Zero(n);
  c.z.resize(streams_.size());
  MatrixXd pre(e, n);
  for (Index col = 0; col < n; ++col) {
    pre.col(col) = params_.value(slot_embed_).col(col % l);
  }
  for (std::size_t s = 0; s < streams_.size(); ++s) {
    const MatrixXd& raw = batch.streams[s];
    const RowVectorXd& m = batch.masks[s];
    if (raw.rows() != streams_[s].dim || raw.cols() != n || m.size() != n) {
      throw_usage("model batch stream " + streams_[s].name + " has wrong shape");
    }
    MatrixXd z = (raw.colwise() - norm_.stream_mean[s]).array().colwise() /
                 norm_.stream_std[s].array();
    z.array().rowwise() *= m.array();
    MatrixXd emb = params_.value(embed_w_[s]) * z;
    emb.colwise() += VectorXd(params_.value(embed_b_[s]));
    emb.array().rowwise() *= m.array();
    pre += emb;
    c.slot_mask = c.slot_mask.cwiseMax(m);
    c.z[s] = std::move(z);
  }
  c.tokens = pre.array().tanh();
  c.tokens.array().rowwise() *= c.slot_mask.array();

  MatrixXd h0;
  if (config_.backbone == Backbone::kWindowedMlp) {
    c.proj = params_.value(proj_w_) * c.tokens;
    c.proj.colwise() += VectorXd(params_.value(proj_b_));
    c.proj.array().rowwise() *= c.slot_mask.array();
    h0 = Eigen::Map<const MatrixXd>(c.proj.data(), c.proj.rows() * l, nb);
  } else {
    const double scale = 1.0 / std::sqrt(static_cast<double>(e));
    MatrixXd current(e, nb);
    for (int b = 0; b < nb; ++b) current.col(b) = c.tokens.col(b * l + l - 1);
    c.q = params_.value(att_q_) * current;
    c.keys = params_.value(att_k_) * c.tokens;
    c.values = params_.value(att_v_) * c.tokens;
    c.alpha = MatrixXd::Zero(l, nb);
    c.attended = MatrixXd::Zero(e, nb);
    for (int b = 0; b < nb; ++b) {
      double best = -INFINITY;
      VectorXd score(l);
      for (int j = 0; j < l; ++j) {
        if (c.slot_mask(b * l + j) > 0.0) {
          score(j) = scale * c.q.col(b).dot(c.keys.col(b * l + j));
          best = std::max(best, score(j));
        }
      }
      double total = 0.0;
      for (int j = 0; j < l; ++j) {
        if (c.slot_mask(b * l + j) > 0.0) {
          c.alpha(j, b) = std::exp(score(j) - best);
          total += c.alpha(j, b);
        }
      }
      if (total > 0.0) c.alpha.col(b) /= total;
      for (int j = 0; j < l; ++j) {
        c.attended.col(b) += c.alpha(j, b) * c.values.col(b * l + j);
      }
    }
    h0 = current + params_.value(att_o_) * c.attended;
  }

  c.h.assign(1, std::move(h0));
  for (std::size_t i = 0; i < hidden_w_.size(); ++i) {
    MatrixXd a = params_.value(hidden_w_[i]) * c.h.back();
    a.colwise() += VectorXd(params_.value(hidden_b_[i]));
    c.h.push_back(a.array().tanh());
  }

  c.y.resize(heads_.size());
  c.out.resize(heads_.size());
  for (std::size_t k = 0; k < heads_.size(); ++k) {
    const HeadSpec& hs = heads_[k];
    c.y[k] = params_.value(head_w_[k]) * c.h.back();
    c.y[k].colwise() += VectorXd(params_.value(head_b_[k]));
    MatrixXd o(hs.dim, nb);
    for (int b = 0; b < nb; ++b) {
      for (int d = 0; d < hs.dim; ++d) {
        const double y = c.y[k](d, b);
        o(d, b) = hs.bounded
                      ? hs.lo(d) + (hs.hi(d) - hs.lo(d)) * sigmoid(y)
                      : norm_.head_mean[k](d) + norm_.head_std[k](d) * y;
      }
    }
    c.out[k] = std::move(o);
  }
}

std::vector<MatrixXd> SeqModel::predict(const ModelBatch& batch) const {
  Cache c;
  forward(batch, c);
  return std::move(c.out);
}

std::vector<double> SeqModel::loss(const ModelBatch& batch,
                                   const std::vector<MatrixXd>& targets,
                                   VectorXd* grad) const {
  if (targets.size() != heads_.size()) throw_usage("wrong number of targets");
  Cache c;
  forward(batch, c);
  const int nb = c.batch;
  const int l = c.slots;
  const int e = config_.embed_width;

  std::vector<double> losses(heads_.size(), 0.0);
  std::vector<MatrixXd> dy(heads_.size());
  for (std::size_t k = 0; k < heads_.size(); ++k) {
    const HeadSpec& hs = heads_[k];
    if (targets[k].rows() != hs.dim || targets[k].cols() != nb) {
      throw_usage("target for head " + hs.name + " has wrong shape");
    }
    MatrixXd err = (c.out[k] - targets[k]).array().colwise() /
                   norm_.head_std[k].array();
    losses[k] = err.squaredNorm() / nb;
    if (!grad) continue;
    MatrixXd d = err.array().colwise() / norm_.head_std[k].array();
    d *= 2.0 / nb;
    for (int b = 0; b < nb; ++b) {
      for (int r = 0; r < hs.dim; ++r) {
        if (hs.bounded) {
          const double s = sigmoid(c.y[k](r, b));
          d(r, b) *= (hs.hi(r) - hs.lo(r)) * s * (1.0 - s);
        } else {
          d(r, b) *= norm_.head_std[k](r);
        }
      }
    }
    dy[k] = std::move(d);
  }
  if (!grad) return losses;

  grad->setZero(params_.size());
  auto g = [&](int id) { return nn::Parameters::view(*grad, params_.info(id)); };

  MatrixXd dh = MatrixXd::Zero(c.h.back().rows(), nb);
  for (std::size_t k = 0; k < heads_.size(); ++k) {
    g(head_w_[k]) += dy[k] * c.h.back().transpose();
    g(head_b_[k]) += dy[k].rowwise().sum();
    dh += params_.value(head_w_[k]).transpose() * dy[k];
  }
  for (std::size_t i = hidden_w_.size(); i-- > 0;) {
    const MatrixXd& out = c.h[i + 1];
    MatrixXd dpre = dh.array() * (1.0 - out.array().square());
    g(hidden_w_[i]) += dpre * c.h[i].transpose();
    g(hidden_b_[i]) += dpre.rowwise().sum();
    dh = params_.value(hidden_w_[i]).transpose() * dpre;
  }

  MatrixXd dtokens;
  if (config_.backbone == Backbone::kWindowedMlp) {
    MatrixXd dproj =
        Eigen::Map<const MatrixXd>(dh.data(), config_.slot_width, Index{nb} * l);
    dproj.array().rowwise() *= c.slot_mask.array();
    g(proj_w_) += dproj * c.tokens.transpose();
    g(proj_b_) += dproj.rowwise().sum();
    dtokens = params_.value(proj_w_).transpose() * dproj;
  } else {
    const double scale = 1.0 / std::sqrt(static_cast<double>(e));
    MatrixXd current(e, nb);
    for (int b = 0; b < nb; ++b) current.col(b) = c.tokens.col(b * l + l - 1);
    MatrixXd dcurrent = dh;
    g(att_o_) += dh * c.attended.transpose();
    const MatrixXd dattended = params_.value(att_o_).transpose() * dh;
    MatrixXd dvalues = MatrixXd::Zero(e, Index{nb} * l);
    MatrixXd dkeys = MatrixXd::Zero(e, Index{nb} * l);
    MatrixXd dq = MatrixXd::Zero(e, nb);
    for (int b = 0; b < nb; ++b) {
      VectorXd dalpha = VectorXd::Zero(l);
      for (int j = 0; j < l; ++j) {
        if (c.alpha(j, b) == 0.0) continue;
        dvalues.col(b * l + j) = c.alpha(j, b) * dattended.col(b);
        dalpha(j) = dattended.col(b).dot(c.values.col(b * l + j));
      }
      const double mean = c.alpha.col(b).dot(dalpha);
      for (int j = 0; j < l; ++j) {
        if (c.alpha(j, b) == 0.0) continue;
        const double ds = c.alpha(j, b) * (dalpha(j) - mean) * scale;
        dq.col(b) += ds * c.keys.col(b * l + j);
        dkeys.col(b * l + j) = ds * c.q.col(b);
      }
    }
    g(att_q_) += dq * current.transpose();
    dcurrent += params_.value(att_q_).transpose() * dq;
    g(att_k_) += dkeys * c.tokens.transpose();
    g(att_v_) += dvalues * c.tokens.transpose();
    dtokens = params_.value(att_k_).transpose() * dkeys +
              params_.value(att_v_).transpose() * dvalues;
    for (int b = 0; b < nb; ++b) dtokens.col(b * l + l - 1) += dcurrent.col(b);
  }

  MatrixXd dpre = dtokens.array() * (1.0 - c.tokens.array().square());
  dpre.array().rowwise() *= c.slot_mask.array();
  auto dslot = g(slot_embed_);
  for (Index col = 0; col < dpre.cols(); ++col) dslot.col(col % l) += dpre.col(col);
  for (std::size_t s = 0; s < streams_.size(); ++s) {
    MatrixXd ds = dpre;
    ds.array().rowwise() *= batch.masks[s].array();
    g(embed_w_[s]) += ds * c.z[s].transpose();
    g(embed_b_[s]) += ds.rowwise().sum();
  }
  return losses;
}

namespace {

void put(ModelBatch& mb, int stream, Index col, int row, const Vec3& v) {
  mb.streams[stream].block<3, 1>(row, col) = v;
}

void check_sample(const SeqModel& model, const ModelBatch& mb, int b,
                  int window_size) {
  if (b < 0 || b >= mb.batch) throw_usage("sample index out of range");
  if (window_size != model.config().window) {
    throw_usage("history window length " + std::to_string(window_size) +
                " does not match the model window " +
                std::to_string(model.config().window));
  }
}

void set_mask(ModelBatch& mb, int stream, Index col, bool on) {
  mb.masks[stream](col) = on ? 1.0 : 0.0;
}

}  // namespace

void encode_gt(const SeqModel& model, ModelBatch& mb, int b,
               const GtWindow& w, const Vec3& x, const Vec3& v, const Vec3& dx,
               const Vec3& f_next) {
  if (model.kind() != ModelKind::kGainTuner) throw_usage("encode_gt: wrong model");
  check_sample(model, mb, b, w.size());
  const int l = mb.slots;
  const Index base = Index{b} * l;
  for (int j = 0; j < l; ++j) {
    const Index col = base + j;
    const bool cur = j == l - 1;
    const bool valid = cur || w.valid[j] != 0;
    for (int s = 0; s < 3; ++s) mb.streams[s].col(col).setZero();
    if (!valid) {
      for (int s = 0; s < 3; ++s) set_mask(mb, s, col, false);
      continue;
    }
    const GtSlot* slot = cur ? nullptr : &w.slots[j];
    put(mb, 0, col, 0, cur ? x : slot->x);
    put(mb, 0, col, 3, cur ? v : slot->v);
    put(mb, 0, col, 6, cur ? dx : slot->dx);
    if (!cur) put(mb, 1, col, 0, slot->k);
    put(mb, 2, col, 0, cur ? f_next : slot->f_next);
    set_mask(mb, 0, col, true);
    set_mask(mb, 1, col, !cur);
    set_mask(mb, 2, col, true);
  }
}

void encode_fp(const SeqModel& model, ModelBatch& mb, int b,
               const FpWindow& w, const Vec3& x, const Vec3& v, const Vec3& f,
               double rtg) {
  if (model.kind() != ModelKind::kForcePlanner) {
    throw_usage("encode_fp: wrong model");
  }
  check_sample(model, mb, b, w.size());
  const int l = mb.slots;
  const Index base = Index{b} * l;
  for (int j = 0; j < l; ++j) {
    const Index col = base + j;
    const bool cur = j == l - 1;
    const bool valid = cur || w.valid[j] != 0;
    for (int s = 0; s < 3; ++s) mb.streams[s].col(col).setZero();
    if (!valid) {
      for (int s = 0; s < 3; ++s) set_mask(mb, s, col, false);
      continue;
    }
    const FpSlot* slot = cur ? nullptr : &w.slots[j];
    put(mb, 0, col, 0, cur ? x : slot->x);
    put(mb, 0, col, 3, cur ? v : slot->v);
    put(mb, 0, col, 6, cur ? f : slot->f);
    if (!cur) {
      put(mb, 1, col, 0, slot->dx);
      put(mb, 1, col, 3, slot->f_next);
    }
    mb.streams[2](0, col) = cur ? rtg : slot->rtg;
    set_mask(mb, 0, col, true);
    set_mask(mb, 1, col, !cur);
    set_mask(mb, 2, col, true);
  }
}

void encode_joint(const SeqModel& model, ModelBatch& mb, int b,
                  const WindowPair& w, const Vec3& x, const Vec3& v,
                  const Vec3& f, double rtg) {
  if (model.kind() != ModelKind::kJoint) throw_usage("encode_joint: wrong model");
  check_sample(model, mb, b, w.fp.size());
  if (w.gt.size() != w.fp.size()) throw_usage("encode_joint: window mismatch");
  const int l = mb.slots;
  const Index base = Index{b} * l;
  for (int j = 0; j < l; ++j) {
    const Index col = base + j;
    const bool cur = j == l - 1;
    const bool valid = cur || w.fp.valid[j] != 0;
    for (int s = 0; s < 3; ++s) mb.streams[s].col(col).setZero();
    if (!valid) {
      for (int s = 0; s < 3; ++s) set_mask(mb, s, col, false);
      continue;
    }
    const FpSlot* slot = cur ? nullptr : &w.fp.slots[j];
    put(mb, 0, col, 0, cur ? x : slot->x);
    put(mb, 0, col, 3, cur ? v : slot->v);
    put(mb, 0, col, 6, cur ? f : slot->f);
    if (!cur) {
      put(mb, 1, col, 0, slot->dx);
      put(mb, 1, col, 3, w.gt.slots[j].k);
    }
    mb.streams[2](0, col) = cur ? rtg : slot->rtg;
    set_mask(mb, 0, col, true);
    set_mask(mb, 1, col, !cur);
    set_mask(mb, 2, col, true);
  }
}

Vec3 gt_forward(const SeqModel& gt, const GtWindow& window, const Vec3& x,
                const Vec3& v, const Vec3& dx, const Vec3& f_next) {
  ModelBatch mb = gt.make_batch(1);
  encode_gt(gt, mb, 0, window, x, v, dx, f_next);
  return gt.predict(mb)[0].col(0);
}

PlannerOutput fp_forward(const SeqModel& fp, const FpWindow& window,
                         const Vec3& x, const Vec3& v, const Vec3& f,
                         double rtg) {
  ModelBatch mb = fp.make_batch(1);
  encode_fp(fp, mb, 0, window, x, v, f, rtg);
  const auto out = fp.predict(mb);
  return {out[0].col(0), out[1].col(0)};
}

JointOutput joint_forward(const SeqModel& joint, const WindowPair& windows,
                          const Vec3& x, const Vec3& v, const Vec3& f,
                          double rtg) {
  ModelBatch mb = joint.make_batch(1);
  encode_joint(joint, mb, 0, windows, x, v, f, rtg);
  const auto out = joint.predict(mb);
  return {out[0].col(0), out[1].col(0)};
}

ModelBatch encode_rows(const SeqModel& model, std::span<const DatasetRow> rows) {
  ModelBatch mb = model.make_batch(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DatasetRow& r = rows[i];
    const int b = static_cast<int>(i);
    switch (model.kind()) {
      case ModelKind::kGainTuner:
        encode_gt(model, mb, b, r.gt, r.x, r.v, r.dx, r.f_next);
        break;
      case ModelKind::kForcePlanner:
        encode_fp(model, mb, b, r.fp, r.x, r.v, r.f, r.rtg);
        break;
      case ModelKind::kJoint:
        encode_joint(model, mb, b, WindowPair{r.gt, r.fp}, r.x, r.v, r.f, r.rtg);
        break;
    }
  }
  return mb;
}

std::vector<MatrixXd> targets_for(const SeqModel& model,
                                  std::span<const DatasetRow> rows) {
  const Index n = static_cast<Index>(rows.size());
  std::vector<MatrixXd> t;
  for (const HeadSpec& h : model.heads()) t.emplace_back(h.dim, n);
  for (Index b = 0; b < n; ++b) {
    const DatasetRow& r = rows[b];
    switch (model.kind()) {
      case ModelKind::kGainTuner:
        t[0].col(b) = r.k;
        break;
      case ModelKind::kForcePlanner:
        t[0].col(b) = r.dx;
        t[1].col(b) = r.f_next;
        break;
      case ModelKind::kJoint:
        t[0].col(b) = r.dx;
        t[1].col(b) = r.k;
        break;
    }
  }
  return t;
}

namespace {

class RunningStats {
 public:
  explicit RunningStats(int dim)
      : sum_(VectorXd::Zero(dim)), sq_(VectorXd::Zero(dim)) {}
  void add(const VectorXd& v) {
    sum_ += v;
    sq_ += v.cwiseAbs2();
    ++n_;
  }
  VectorXd mean() const { return n_ ? VectorXd(sum_ / n_) : VectorXd::Zero(sum_.size()); }
  VectorXd stddev() const {
    VectorXd s(sum_.size());
    for (Index i = 0; i < s.size(); ++i) {
      const double m = n_ ? sum_(i) / n_ : 0.0;
      const double var = n_ ? std::max(0.0, sq_(i) / n_ - m * m) : 0.0;
      const double sd = std::sqrt(var);
      s(i) = sd > 1e-9 * std::max(1.0, std::abs(m)) ? sd : 1.0;
    }
    return s;
  }

 private:
  VectorXd sum_, sq_;
  double n_ = 0;
};

VectorXd cat(std::initializer_list<VectorXd> parts) {
  Index n = 0;
  for (const auto& p : parts) n += p.size();
  VectorXd out(n);
  Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

}  // namespace

Normalization fit_normalization(const SeqModel& model, const Dataset& data) {
  if (data.empty()) throw_usage("cannot fit normalization on an empty dataset");
  std::vector<RunningStats> in, out;
  for (const StreamSpec& s : model.streams()) in.emplace_back(s.dim);
  for (const HeadSpec& h : model.heads()) out.emplace_back(h.dim);

  const auto& trajs = data.trajectories();
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& rtg = data.returns(i);
    for (std::size_t t = 0; t < trajs[i].steps.size(); ++t) {
      const Step& s = trajs[i].steps[t];
      switch (model.kind()) {
        case ModelKind::kGainTuner:
          in[0].add(cat({s.x, s.v, s.dx}));
          in[1].add(s.k);
          in[2].add(s.f);
          break;
        case ModelKind::kForcePlanner:
          in[0].add(cat({s.x, s.v, s.f}));
          in[1].add(cat({s.dx, s.f}));
          in[2].add(VectorXd::Constant(1, rtg[t]));
          break;
        case ModelKind::kJoint:
          in[0].add(cat({s.x, s.v, s.f}));
          in[1].add(cat({s.dx, s.k}));
          in[2].add(VectorXd::Constant(1, rtg[t]));
          break;
      }
    }
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const DatasetRow r = data.row_head(i);
    switch (model.kind()) {
      case ModelKind::kGainTuner:
        out[0].add(r.k);
        break;
      case ModelKind::kForcePlanner:
        out[0].add(r.dx);
        out[1].add(r.f_next);
        break;
      case ModelKind::kJoint:
        out[0].add(r.dx);
        out[1].add(r.k);
        break;
    }
  }
  Normalization n;
  for (const auto& s : in) {
    n.stream_mean.push_back(s.mean());
    n.stream_std.push_back(s.stddev());
  }
  for (const auto& s : out) {
    n.head_mean.push_back(s.mean());
    n.head_std.push_back(s.stddev());
  }
  return n;
}

}  // namespace pihlab
