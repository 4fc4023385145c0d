/* Copyright 2026 The dsmgibbs Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dsmgibbs/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace dsmgibbs {
namespace {

void require_batch(const Eigen::MatrixXd& batch) {
  if (batch.rows() == 0 || batch.cols() == 0) throw ConfigError("minibatch is empty");
}

// Columns = noisy points for the numgrad batch routines.
Eigen::MatrixXd add_noise(const Eigen::MatrixXd& clean_cols, double sigma, Rng& rng) {
  Eigen::MatrixXd noisy = clean_cols;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < noisy.cols(); ++i) {
    for (Eigen::Index k = 0; k < noisy.rows(); ++k) noisy(k, i) += sigma * normal(rng);
  }
  return noisy;
}

numgrad::LossAndGrad dsm_columns(const numgrad::MlpParams& params, const Eigen::MatrixXd& clean,
                                 const Eigen::MatrixXd& inputs, double sigma, double weight,
                                 Parameterization parameterization) {
  const Eigen::Index batch = clean.cols();
  const Eigen::VectorXd sigmas = Eigen::VectorXd::Constant(batch, sigma);
  const Eigen::VectorXd weights = Eigen::VectorXd::Constant(batch, weight / double(batch));
  return parameterization == Parameterization::kEnergy
             ? numgrad::dsm_batch(params, clean, inputs, sigmas, weights)
             : numgrad::dsm_batch_score_net(params, clean, inputs, sigmas, weights);
}

}  // namespace

Adam::Adam(AdamConfig config, Eigen::Index num_parameters)
    : config_(config),
      m_(Eigen::VectorXd::Zero(num_parameters)),
      v_(Eigen::VectorXd::Zero(num_parameters)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ConfigError("Adam state does not match parameter count");
  }
  ++steps_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
  const double m_corr = 1.0 - std::pow(config_.beta1, double(steps_));
  const double v_corr = 1.0 - std::pow(config_.beta2, double(steps_));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    params[i] -= config_.learning_rate * (m_[i] / m_corr) /
                 (std::sqrt(v_[i] / v_corr) + config_.epsilon);
  }
}

std::string to_string(Objective objective) {
  return objective == Objective::kDsm ? "dsm" : "kl";
}

Objective parse_objective(const std::string& name) {
  if (name == "dsm") return Objective::kDsm;
  if (name == "kl" || name == "joint_kl") return Objective::kJointKl;
  throw ConfigError("unknown objective '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("training sigma must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  for (double s : sigma_schedule) {
    if (!(s > 0.0)) throw ConfigError("schedule sigmas must be positive");
  }
  if (objective == Objective::kJointKl && sigma_conditioned()) {
    throw ConfigError("joint-KL training does not support a sigma schedule");
  }
}

numgrad::LossAndGrad dsm_minibatch_loss(const numgrad::MlpParams& params,
                                        const Eigen::MatrixXd& batch, double sigma, Rng& rng,
                                        Parameterization parameterization) {
  require_batch(batch);
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  const Eigen::MatrixXd clean = batch.transpose();
  const Eigen::MatrixXd noisy = add_noise(clean, sigma, rng);
  return dsm_columns(params, clean, noisy, sigma, 1.0, parameterization);
}

numgrad::LossAndGrad dsm_minibatch_loss_conditioned(const numgrad::MlpParams& params,
                                                    const Eigen::MatrixXd& batch,
                                                    std::span<const double> schedule, Rng& rng,
                                                    Parameterization parameterization) {
  require_batch(batch);
  if (schedule.empty()) throw ConfigError("sigma schedule is empty");
  const std::size_t level =
      std::uniform_int_distribution<std::size_t>(0, schedule.size() - 1)(rng);
  const double sigma = schedule[level];
  const Eigen::MatrixXd clean = batch.transpose();
  Eigen::MatrixXd inputs(clean.rows() + 1, clean.cols());
  inputs.topRows(clean.rows()) = add_noise(clean, sigma, rng);
  inputs.row(clean.rows()).setConstant(std::log(sigma));
  return dsm_columns(params, clean, inputs, sigma, sigma * sigma, parameterization);
}

numgrad::LossAndGrad kl_minibatch_loss(const numgrad::MlpParams& params,
                                       const Eigen::MatrixXd& batch, double sigma, Rng& rng) {
  require_batch(batch);
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  const Eigen::MatrixXd clean = batch.transpose();
  const Eigen::MatrixXd noisy = add_noise(clean, sigma, rng);
  numgrad::LossAndGrad out = numgrad::gaussian_nll_batch(params, clean, noisy);
  const double inv = 1.0 / double(batch.rows());
  out.loss *= inv;
  out.grads.scale(inv);
  return out;
}

TrainResult train(numgrad::MlpParams params, const Eigen::MatrixXd& dataset,
                  const TrainConfig& config) {
  config.validate();
  const Eigen::Index n = dataset.rows();
  if (n < config.batch_size) throw ConfigError("dataset is smaller than one minibatch");
  const int input_extra = config.sigma_conditioned() ? 1 : 0;
  if (params.in_dim() != dataset.cols() + input_extra) {
    throw ConfigError("network input width does not match the dataset dimension");
  }

  Rng rng = make_stream(config.seed, 0x7261696eULL);
  TrainResult result;
  result.params = std::move(params);
  Eigen::VectorXd flat = result.params.flatten();
  Adam adam(config.adam, flat.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  std::int64_t iteration = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd batch(size, dataset.cols());
      for (Eigen::Index i = 0; i < size; ++i) batch.row(i) = dataset.row(order[start + i]);

      numgrad::LossAndGrad step;
      if (config.objective == Objective::kJointKl) {
        step = kl_minibatch_loss(result.params, batch, config.sigma, rng);
      } else if (config.sigma_conditioned()) {
        step = dsm_minibatch_loss_conditioned(result.params, batch, config.sigma_schedule, rng,
                                              config.parameterization);
      } else {
        step = dsm_minibatch_loss(result.params, batch, config.sigma, rng,
                                  config.parameterization);
      }
      const Eigen::VectorXd grad = step.grads.flatten();
      if (!std::isfinite(step.loss) || !grad.allFinite()) {
        throw TrainingAborted("non-finite loss at iteration " + std::to_string(iteration),
                              iteration, std::move(result));
      }
      if (config.objective == Objective::kJointKl && step.loss < config.divergence_floor) {
        result.trace.push_back({iteration, epoch, step.loss});
        throw TrainingAborted("divergence guard: loss " + std::to_string(step.loss) +
                                  " below floor at iteration " + std::to_string(iteration),
                              iteration, std::move(result));
      }
      adam.step(flat, grad);
      result.params.assign(flat);
      result.trace.push_back({iteration, epoch, step.loss});
      ++iteration;
    }
  }
  return result;
}

void save_loss_trace(const std::vector<LossRecord>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "iteration,epoch,loss\n";
  char buf[64];
  for (const LossRecord& r : trace) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.loss);
    out << r.iteration << ',' << r.epoch << ',' << buf << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace dsmgibbs
