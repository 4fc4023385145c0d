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

#ifndef DSMGIBBS_TRAINING_H_
#define DSMGIBBS_TRAINING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsmgibbs/errors.h"
#include "dsmgibbs/numgrad.h"
#include "dsmgibbs/random.h"

namespace dsmgibbs {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a flat parameter vector.
class Adam {
 public:
  Adam(AdamConfig config, Eigen::Index num_parameters);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  std::int64_t steps() const { return steps_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::int64_t steps_ = 0;
};

enum class Objective { kDsm, kJointKl };
enum class Parameterization { kEnergy, kScore };

std::string to_string(Objective objective);
Objective parse_objective(const std::string& name);

struct TrainConfig {
  Objective objective = Objective::kDsm;
  Parameterization parameterization = Parameterization::kEnergy;
  double sigma = 0.2;
  // Non-empty: noise-conditioned DSM, sigma drawn uniformly from this list
  // per minibatch and the loss weighted by sigma^2.
  std::vector<double> sigma_schedule;
  int epochs = 100;
  int batch_size = 100;
  AdamConfig adam;
  std::uint64_t seed = 0;
  // Joint-KL training halts when the minibatch loss drops below this.
  double divergence_floor = -1e6;

  bool sigma_conditioned() const { return !sigma_schedule.empty(); }
  void validate() const;
};

struct LossRecord {
  std::int64_t iteration = 0;
  std::int64_t epoch = 0;
  double loss = 0.0;
};

struct TrainResult {
  numgrad::MlpParams params;
  std::vector<LossRecord> trace;
};

// Raised when training hits a non-finite loss or the divergence guard.
// `partial` holds the parameters from before the offending step.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, std::int64_t iteration, TrainResult partial)
      : NumericError(what), iteration_(iteration), partial_(std::move(partial)) {}
  std::int64_t iteration() const { return iteration_; }
  const TrainResult& partial() const { return partial_; }

 private:
  std::int64_t iteration_;
  TrainResult partial_;
};

// Mean over the batch (rows are points) of
// 0.5 |(xt - x)/sigma^2 + s(xt)|^2 with fresh xt = x + sigma * eps.
numgrad::LossAndGrad dsm_minibatch_loss(const numgrad::MlpParams& params,
                                        const Eigen::MatrixXd& batch, double sigma, Rng& rng,
                                        Parameterization parameterization = Parameterization::kEnergy);

// Noise-conditioned variant: one sigma drawn uniformly from `schedule`, loss
// multiplied by sigma^2, network input (xt, log sigma).
numgrad::LossAndGrad dsm_minibatch_loss_conditioned(
    const numgrad::MlpParams& params, const Eigen::MatrixXd& batch,
    std::span<const double> schedule, Rng& rng,
    Parameterization parameterization = Parameterization::kEnergy);

// Mean of -log q(x | xt) for a (mean, log-std) posterior network.
numgrad::LossAndGrad kl_minibatch_loss(const numgrad::MlpParams& params,
                                       const Eigen::MatrixXd& batch, double sigma, Rng& rng);

// epochs x ceil(N / B) Adam steps over shuffled minibatches; one loss record
// per step. Deterministic for a fixed seed.
TrainResult train(numgrad::MlpParams params, const Eigen::MatrixXd& dataset,
                  const TrainConfig& config);

// CSV with columns iteration,epoch,loss.
void save_loss_trace(const std::vector<LossRecord>& trace, const std::string& path);

}  // namespace dsmgibbs

#endif  // DSMGIBBS_TRAINING_H_
