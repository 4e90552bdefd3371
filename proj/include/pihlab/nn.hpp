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

// Minimal parameter storage and optimizer for hand-differentiated models.
// All trainable tensors of a model live in one flat vector so optimizers,
// checkpoints and finite-difference checks can treat them uniformly.

#ifndef PIHLAB_NN_HPP_
#define PIHLAB_NN_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pihlab::nn {

using Matrix = Eigen::MatrixXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

struct TensorInfo {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index size() const { return rows * cols; }
};

class Parameters {
 public:
  // Registers a tensor and returns its id. Must precede any value access.
  int add(std::string name, Eigen::Index rows, Eigen::Index cols);

  MatrixMap value(int id) { return map(values_, id); }
  ConstMatrixMap value(int id) const { return cmap(values_, id); }
  // View of `flat` (same layout as values) for the given tensor.
  static MatrixMap view(Eigen::VectorXd& flat, const TensorInfo& t);
  static ConstMatrixMap view(const Eigen::VectorXd& flat, const TensorInfo& t);

  const TensorInfo& info(int id) const { return tensors_[id]; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  int find(const std::string& name) const;  // -1 when absent

  Eigen::VectorXd& flat() { return values_; }
  const Eigen::VectorXd& flat() const { return values_; }
  Eigen::Index size() const { return values_.size(); }

 private:
  MatrixMap map(Eigen::VectorXd& v, int id);
  ConstMatrixMap cmap(const Eigen::VectorXd& v, int id) const;

  std::vector<TensorInfo> tensors_;
  Eigen::VectorXd values_;
};

// Uniform Glorot initialization of a (fan_out x fan_in) weight.
void glorot_uniform(MatrixMap w, std::mt19937_64& rng, double gain = 1.0);

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index size, AdamConfig config);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::int64_t steps() const { return t_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  // Resumes from saved optimizer state.
  void restore(Eigen::VectorXd m, Eigen::VectorXd v, std::int64_t steps);

 private:
  AdamConfig config_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::int64_t t_ = 0;
};

}  // namespace pihlab::nn

#endif  // PIHLAB_NN_HPP_
