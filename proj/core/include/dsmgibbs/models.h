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

#ifndef DSMGIBBS_MODELS_H_
#define DSMGIBBS_MODELS_H_

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsmgibbs/numgrad.h"
#include "dsmgibbs/random.h"

namespace dsmgibbs {

// A (possibly noise-conditioned) density q~(x) ~ exp(-energy(x)).
//
// `score` is grad log q~ = -grad energy and `hvp` is the Jacobian of the score
// applied to v, i.e. (grad^2 log q~) v. Single-level models ignore `sigma`.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual int dim() const = 0;
  virtual double energy(const Eigen::VectorXd& x, double sigma) const = 0;
  virtual Eigen::VectorXd score(const Eigen::VectorXd& x, double sigma) const = 0;
  virtual Eigen::VectorXd hvp(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                              double sigma) const = 0;

  // Score Jacobian for several directions at one point; columns of
  // `directions` map to columns of the result.
  virtual Eigen::MatrixXd hvp_many(const Eigen::VectorXd& x, const Eigen::MatrixXd& directions,
                                   double sigma) const;

  // True when the score Jacobian is a symmetric Hessian (energy
  // parameterization), so a full covariance can be formed.
  virtual bool has_exact_hessian() const = 0;
  virtual bool sigma_conditioned() const { return false; }

  // Symmetric Hessian of log q~. Throws CapabilityError without
  // has_exact_hessian().
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x, double sigma) const;
};

struct GaussianMixture {
  Eigen::VectorXd weights;
  std::vector<Eigen::VectorXd> means;
  double component_std = 1.0;

  int dim() const { return means.empty() ? 0 : int(means.front().size()); }
  // Throws ConfigError on empty/unnormalized weights, ragged means or a
  // non-positive component std.
  void validate() const;

  // Four components at (+-1, +-1), equal weights.
  static GaussianMixture FourModes(double component_std = 0.2);
  static GaussianMixture SingleGaussian(const Eigen::VectorXd& mean, double std);
};

double mog_logpdf(const GaussianMixture& mog, const Eigen::VectorXd& x);
Eigen::VectorXd mog_score(const GaussianMixture& mog, const Eigen::VectorXd& x);
Eigen::MatrixXd mog_hessian(const GaussianMixture& mog, const Eigen::VectorXd& x);
// Posterior component probabilities r_k(x), computed in log space.
Eigen::VectorXd mog_responsibilities(const GaussianMixture& mog, const Eigen::VectorXd& x);
Eigen::VectorXd mog_sample(const GaussianMixture& mog, Rng& rng);

// Exact Gaussian convolution: component std becomes sqrt(std^2 + sigma^2).
GaussianMixture noisy_mog(const GaussianMixture& mog, double sigma);

// log p(x | xt) = log N(xt; x, sigma^2 I) + log p_d(x) - log p~_d(xt).
double true_posterior_logpdf(const GaussianMixture& mog, double sigma,
                             const Eigen::VectorXd& noisy, const Eigen::VectorXd& clean);

// Closed-form oracle model of the noised mixture. It is noise-aware: queries
// at sigma describe noisy_mog(mog, sigma).
class MixtureModel final : public EnergyModel {
 public:
  explicit MixtureModel(GaussianMixture mog);

  int dim() const override { return mog_.dim(); }
  double energy(const Eigen::VectorXd& x, double sigma) const override;
  Eigen::VectorXd score(const Eigen::VectorXd& x, double sigma) const override;
  Eigen::VectorXd hvp(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                      double sigma) const override;
  Eigen::MatrixXd hvp_many(const Eigen::VectorXd& x, const Eigen::MatrixXd& directions,
                           double sigma) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x, double sigma) const override;
  bool has_exact_hessian() const override { return true; }
  bool sigma_conditioned() const override { return true; }

  const GaussianMixture& mixture() const { return mog_; }

 private:
  GaussianMixture mog_;
};

// Input layout of noise-conditioned networks: (x, log sigma).
Eigen::VectorXd conditioned_input(const Eigen::VectorXd& x, double sigma, bool conditioned);

// Scalar energy network f_theta. score = -grad f, hvp = -(grad^2 f) v.
class MlpEnergyModel final : public EnergyModel {
 public:
  MlpEnergyModel(numgrad::MlpParams params, bool sigma_conditioned);

  int dim() const override { return dim_; }
  double energy(const Eigen::VectorXd& x, double sigma) const override;
  Eigen::VectorXd score(const Eigen::VectorXd& x, double sigma) const override;
  Eigen::VectorXd hvp(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                      double sigma) const override;
  Eigen::MatrixXd hvp_many(const Eigen::VectorXd& x, const Eigen::MatrixXd& directions,
                           double sigma) const override;
  bool has_exact_hessian() const override { return true; }
  bool sigma_conditioned() const override { return conditioned_; }

  const numgrad::MlpParams& params() const { return params_; }

 private:
  numgrad::MlpParams params_;
  bool conditioned_;
  int dim_;
};

// Network that emits the score vector directly. Its Jacobian is not
// guaranteed symmetric and there is no energy.
class ScoreNetModel final : public EnergyModel {
 public:
  ScoreNetModel(numgrad::MlpParams params, bool sigma_conditioned);

  int dim() const override { return dim_; }
  double energy(const Eigen::VectorXd& x, double sigma) const override;
  Eigen::VectorXd score(const Eigen::VectorXd& x, double sigma) const override;
  Eigen::VectorXd hvp(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                      double sigma) const override;
  Eigen::MatrixXd hvp_many(const Eigen::VectorXd& x, const Eigen::MatrixXd& directions,
                           double sigma) const override;
  bool has_exact_hessian() const override { return false; }
  bool sigma_conditioned() const override { return conditioned_; }

  const numgrad::MlpParams& params() const { return params_; }

 private:
  numgrad::MlpParams params_;
  bool conditioned_;
  int dim_;
};

// Gaussian denoising posterior network: outputs (mean[d], log_std[d]).
class PosteriorNet {
 public:
  explicit PosteriorNet(numgrad::MlpParams params);

  int dim() const { return params_.in_dim(); }
  const numgrad::MlpParams& params() const { return params_; }

  struct Output {
    Eigen::VectorXd mean;
    Eigen::VectorXd log_std;
  };
  Output evaluate(const Eigen::VectorXd& noisy) const;

 private:
  numgrad::MlpParams params_;
};

}  // namespace dsmgibbs

#endif  // DSMGIBBS_MODELS_H_
