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

#include "pihlab/nn.hpp"

#include <cmath>

#include "pihlab/error.hpp"

namespace pihlab::nn {

int Parameters::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (find(name) >= 0) throw_usage("duplicate parameter tensor " + name);
  TensorInfo t{std::move(name), values_.size(), rows, cols};
  const Eigen::Index old = values_.size();
  values_.conservativeResize(old + t.size());
  values_.tail(t.size()).setZero();
  tensors_.push_back(std::move(t));
  return static_cast<int>(tensors_.size()) - 1;
}

int Parameters::find(const std::string& name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

MatrixMap Parameters::view(Eigen::VectorXd& flat, const TensorInfo& t) {
  return MatrixMap(flat.data() + t.offset, t.rows, t.cols);
}

ConstMatrixMap Parameters::view(const Eigen::VectorXd& flat,
                                const TensorInfo& t) {
  return ConstMatrixMap(flat.data() + t.offset, t.rows, t.cols);
}

MatrixMap Parameters::map(Eigen::VectorXd& v, int id) {
  return view(v, tensors_[id]);
}

ConstMatrixMap Parameters::cmap(const Eigen::VectorXd& v, int id) const {
  return view(v, tensors_[id]);
}

void glorot_uniform(MatrixMap w, std::mt19937_64& rng, double gain) {
  const double limit =
      gain * std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
  }
}

Adam::Adam(Eigen::Index size, AdamConfig config)
    : config_(config),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void Adam::restore(Eigen::VectorXd m, Eigen::VectorXd v, std::int64_t steps) {
  if (m.size() != m_.size() || v.size() != v_.size() || steps < 0) {
    throw_usage("Adam::restore: state does not match the optimizer");
  }
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = steps;
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw_usage("Adam::step: size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
  const double step = config_.lr / c1;
  const double root_c2 = std::sqrt(c2);
  params.array() -=
      step * m_.array() / (v_.array().sqrt() / root_c2 + config_.eps);
}

}  // namespace pihlab::nn
