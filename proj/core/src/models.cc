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

#include "dsmgibbs/models.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "dsmgibbs/errors.h"

namespace dsmgibbs {
namespace {

void check_dim(const GaussianMixture& mog, const Eigen::VectorXd& x) {
  if (x.size() != mog.dim()) {
    throw ConfigError("point dimension " + std::to_string(x.size()) +
                      " does not match mixture dimension " + std::to_string(mog.dim()));
  }
}

// log w_k - |x - mu_k|^2 / (2 s^2) per component.
Eigen::VectorXd component_log_terms(const GaussianMixture& mog, const Eigen::VectorXd& x) {
  const double inv_two_var = 0.5 / (mog.component_std * mog.component_std);
  Eigen::VectorXd terms(mog.means.size());
  for (std::size_t k = 0; k < mog.means.size(); ++k) {
    const double w = mog.weights[Eigen::Index(k)];
    terms[Eigen::Index(k)] = w > 0.0 ? std::log(w) - (x - mog.means[k]).squaredNorm() * inv_two_var
                                     : -std::numeric_limits<double>::infinity();
  }
  return terms;
}

double log_sum_exp(const Eigen::VectorXd& terms) {
  const double top = terms.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((terms.array() - top).exp().sum());
}

}  // namespace

Eigen::MatrixXd EnergyModel::hvp_many(const Eigen::VectorXd& x, const Eigen::MatrixXd& directions,
                                      double sigma) const {
  Eigen::MatrixXd out(directions.rows(), directions.cols());
  for (Eigen::Index j = 0; j < directions.cols(); ++j) {
    out.col(j) = hvp(x, directions.col(j), sigma);
  }
  return out;
}

Eigen::MatrixXd EnergyModel::hessian(const Eigen::VectorXd& x, double sigma) const {
  if (!has_exact_hessian()) {
    throw CapabilityError("model has no symmetric Hessian (score parameterization); "
                          "use the diagonal Rademacher covariance instead");
  }
  const Eigen::MatrixXd raw = hvp_many(x, Eigen::MatrixXd::Identity(dim(), dim()), sigma);
  return 0.5 * (raw + raw.transpose());
}

void GaussianMixture::validate() const {
  if (means.empty()) throw ConfigError("mixture has no components");
  if (weights.size() != Eigen::Index(means.size())) {
    throw ConfigError("mixture weight count does not match component count");
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12) {
    throw ConfigError("mixture weights must be nonnegative and sum to 1");
  }
  for (const auto& m : means) {
    if (m.size() != means.front().size()) throw ConfigError("mixture means have ragged dimensions");
  }
  if (!(component_std > 0.0) || !std::isfinite(component_std)) {
    throw ConfigError("mixture component std must be positive");
  }
}

GaussianMixture GaussianMixture::FourModes(double component_std) {
  GaussianMixture mog;
  mog.weights = Eigen::VectorXd::Constant(4, 0.25);
  mog.means = {Eigen::Vector2d(-1, -1), Eigen::Vector2d(-1, 1), Eigen::Vector2d(1, 1),
               Eigen::Vector2d(1, -1)};
  mog.component_std = component_std;
  mog.validate();
  return mog;
}

GaussianMixture GaussianMixture::SingleGaussian(const Eigen::VectorXd& mean, double std) {
  GaussianMixture mog;
  mog.weights = Eigen::VectorXd::Ones(1);
  mog.means = {mean};
  mog.component_std = std;
  mog.validate();
  return mog;
}

double mog_logpdf(const GaussianMixture& mog, const Eigen::VectorXd& x) {
  check_dim(mog, x);
  const double var = mog.component_std * mog.component_std;
  return log_sum_exp(component_log_terms(mog, x)) -
         0.5 * double(x.size()) * std::log(2.0 * std::numbers::pi * var);
}

Eigen::VectorXd mog_responsibilities(const GaussianMixture& mog, const Eigen::VectorXd& x) {
  check_dim(mog, x);
  const Eigen::VectorXd terms = component_log_terms(mog, x);
  return (terms.array() - log_sum_exp(terms)).exp();
}

Eigen::VectorXd mog_score(const GaussianMixture& mog, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r = mog_responsibilities(mog, x);
  const double var = mog.component_std * mog.component_std;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(x.size());
  for (std::size_t k = 0; k < mog.means.size(); ++k) {
    s += r[Eigen::Index(k)] * (mog.means[k] - x) / var;
  }
  return s;
}

Eigen::MatrixXd mog_hessian(const GaussianMixture& mog, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r = mog_responsibilities(mog, x);
  const double var = mog.component_std * mog.component_std;
  const Eigen::Index d = x.size();
  Eigen::MatrixXd h = -Eigen::MatrixXd::Identity(d, d) / var;
  Eigen::VectorXd mean_u = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < mog.means.size(); ++k) {
    const Eigen::VectorXd u = (mog.means[k] - x) / var;
    h += r[Eigen::Index(k)] * u * u.transpose();
    mean_u += r[Eigen::Index(k)] * u;
  }
  h -= mean_u * mean_u.transpose();
  return h;
}

Eigen::VectorXd mog_sample(const GaussianMixture& mog, Rng& rng) {
  const double u = uniform01(rng);
  std::size_t k = 0;
  double acc = mog.weights[0];
  while (u >= acc && k + 1 < mog.means.size()) acc += mog.weights[Eigen::Index(++k)];
  return mog.means[k] + mog.component_std * standard_normal(rng, mog.dim());
}

GaussianMixture noisy_mog(const GaussianMixture& mog, double sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("noise std must be nonnegative");
  GaussianMixture out = mog;
  out.component_std = std::sqrt(mog.component_std * mog.component_std + sigma * sigma);
  return out;
}

double true_posterior_logpdf(const GaussianMixture& mog, double sigma,
                             const Eigen::VectorXd& noisy, const Eigen::VectorXd& clean) {
  if (!(sigma > 0.0)) throw ConfigError("posterior needs sigma > 0");
  const double d = double(clean.size());
  const double log_likelihood = -0.5 * (noisy - clean).squaredNorm() / (sigma * sigma) -
                                0.5 * d * std::log(2.0 * std::numbers::pi * sigma * sigma);
  return log_likelihood + mog_logpdf(mog, clean) - mog_logpdf(noisy_mog(mog, sigma), noisy);
}

MixtureModel::MixtureModel(GaussianMixture mog) : mog_(std::move(mog)) { mog_.validate(); }

double MixtureModel::energy(const Eigen::VectorXd& x, double sigma) const {
  return -mog_logpdf(noisy_mog(mog_, sigma), x);
}

Eigen::VectorXd MixtureModel::score(const Eigen::VectorXd& x, double sigma) const {
  return mog_score(noisy_mog(mog_, sigma), x);
}

Eigen::VectorXd MixtureModel::hvp(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                  double sigma) const {
  return hessian(x, sigma) * v;
}

Eigen::MatrixXd MixtureModel::hvp_many(const Eigen::VectorXd& x,
                                       const Eigen::MatrixXd& directions, double sigma) const {
  return hessian(x, sigma) * directions;
}

Eigen::MatrixXd MixtureModel::hessian(const Eigen::VectorXd& x, double sigma) const {
  return mog_hessian(noisy_mog(mog_, sigma), x);
}

Eigen::VectorXd conditioned_input(const Eigen::VectorXd& x, double sigma, bool conditioned) {
  if (!conditioned) return x;
  if (!(sigma > 0.0)) throw ConfigError("noise-conditioned model needs sigma > 0");
  Eigen::VectorXd in(x.size() + 1);
  in << x, std::log(sigma);
  return in;
}

namespace {

int model_dim(const numgrad::MlpParams& params, bool conditioned) {
  if (params.empty()) throw ConfigError("model network has no layers");
  const int dim = params.in_dim() - (conditioned ? 1 : 0);
  if (dim < 1) throw ConfigError("conditioned network needs at least one data input");
  return dim;
}

Eigen::MatrixXd padded(const Eigen::MatrixXd& directions, bool conditioned) {
  if (!conditioned) return directions;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(directions.rows() + 1, directions.cols());
  out.topRows(directions.rows()) = directions;
  return out;
}

}  // namespace

MlpEnergyModel::MlpEnergyModel(numgrad::MlpParams params, bool sigma_conditioned)
    : params_(std::move(params)),
      conditioned_(sigma_conditioned),
      dim_(model_dim(params_, sigma_conditioned)) {
  if (params_.out_dim() != 1) throw ConfigError("energy network must have a scalar output");
}

double MlpEnergyModel::energy(const Eigen::VectorXd& x, double sigma) const {
  return numgrad::forward(params_, conditioned_input(x, sigma, conditioned_)).value[0];
}

Eigen::VectorXd MlpEnergyModel::score(const Eigen::VectorXd& x, double sigma) const {
  return -numgrad::grad_input(params_, conditioned_input(x, sigma, conditioned_)).head(dim_);
}

Eigen::VectorXd MlpEnergyModel::hvp(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                    double sigma) const {
  return hvp_many(x, v, sigma).col(0);
}

Eigen::MatrixXd MlpEnergyModel::hvp_many(const Eigen::VectorXd& x,
                                         const Eigen::MatrixXd& directions, double sigma) const {
  const Eigen::VectorXd in = conditioned_input(x, sigma, conditioned_);
  const Eigen::MatrixXd inputs = in.replicate(1, directions.cols());
  return -numgrad::hvp_input_batch(params_, inputs, padded(directions, conditioned_))
              .topRows(dim_);
}

ScoreNetModel::ScoreNetModel(numgrad::MlpParams params, bool sigma_conditioned)
    : params_(std::move(params)),
      conditioned_(sigma_conditioned),
      dim_(model_dim(params_, sigma_conditioned)) {
  if (params_.out_dim() != dim_) throw ConfigError("score network output must match data dimension");
}

double ScoreNetModel::energy(const Eigen::VectorXd&, double) const {
  throw CapabilityError("score-parameterized model has no energy");
}

Eigen::VectorXd ScoreNetModel::score(const Eigen::VectorXd& x, double sigma) const {
  return numgrad::forward(params_, conditioned_input(x, sigma, conditioned_)).value;
}

Eigen::VectorXd ScoreNetModel::hvp(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                   double sigma) const {
  return hvp_many(x, v, sigma).col(0);
}

Eigen::MatrixXd ScoreNetModel::hvp_many(const Eigen::VectorXd& x,
                                        const Eigen::MatrixXd& directions, double sigma) const {
  const Eigen::VectorXd in = conditioned_input(x, sigma, conditioned_);
  const Eigen::MatrixXd inputs = in.replicate(1, directions.cols());
  return numgrad::jvp_batch(params_, inputs, padded(directions, conditioned_));
}

PosteriorNet::PosteriorNet(numgrad::MlpParams params) : params_(std::move(params)) {
  if (params_.empty() || params_.out_dim() != 2 * params_.in_dim()) {
    throw ConfigError("posterior network must map d inputs to 2d outputs");
  }
}

PosteriorNet::Output PosteriorNet::evaluate(const Eigen::VectorXd& noisy) const {
  const Eigen::VectorXd out = numgrad::forward(params_, noisy).value;
  const Eigen::Index d = noisy.size();
  return {out.head(d), out.tail(d)};
}

}  // namespace dsmgibbs
