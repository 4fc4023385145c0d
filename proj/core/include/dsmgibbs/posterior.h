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

#ifndef DSMGIBBS_POSTERIOR_H_
#define DSMGIBBS_POSTERIOR_H_

// Gaussian approximations N(mu(xt), Sigma(xt)) of the denoising posterior
// p(x | xt) for xt = x + sigma * eps.
//
// Moment matching uses only the noisy model q~:
//   mu(xt)    = xt + sigma^2 grad log q~(xt)
//   Sigma(xt) = sigma^4 grad^2 log q~(xt) + sigma^2 I
// with diagonal (Rademacher) and isotropic (xt-independent) reductions.

#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "dsmgibbs/models.h"
#include "dsmgibbs/random.h"

namespace dsmgibbs {

// Corruption std `sigma` and the noise level the model is queried at. They
// differ only in multi-level sampling, where a step adds the relative noise
// between two levels while the model describes the upper level.
struct NoiseLevel {
  double sigma = 0.0;
  double condition = 0.0;

  static NoiseLevel Single(double sigma) { return {sigma, sigma}; }
};

struct FullCov {
  Eigen::MatrixXd matrix;
};
struct DiagonalCov {
  Eigen::VectorXd variances;
};
struct IsotropicCov {
  double variance = 0.0;
};

enum class Provenance { kMMFull, kMMDiag, kMMIso, kLearned };

std::string to_string(Provenance provenance);

struct GaussianApprox {
  Eigen::VectorXd mean;
  std::variant<FullCov, DiagonalCov, IsotropicCov> cov;
  Provenance provenance = Provenance::kMMFull;
  // Lower Cholesky factor of a full covariance, filled by the constructors.
  Eigen::MatrixXd chol;

  int dim() const { return int(mean.size()); }
  // Dense covariance regardless of storage.
  Eigen::MatrixXd dense_cov() const;
  double logpdf(const Eigen::VectorXd& x) const;
};

constexpr double kDefaultClamp = 1e-6;
constexpr double kLogStdMin = -10.0;
constexpr double kLogStdMax = 5.0;

Eigen::VectorXd mm_mean(const EnergyModel& model, const Eigen::VectorXd& noisy, NoiseLevel level);
inline Eigen::VectorXd mm_mean(const EnergyModel& model, const Eigen::VectorXd& noisy,
                               double sigma) {
  return mm_mean(model, noisy, NoiseLevel::Single(sigma));
}

struct PsdRepair {
  Eigen::MatrixXd matrix;
  // Frobenius norm of the change; 0 when no eigenvalue needed clamping.
  double magnitude = 0.0;
};
// Symmetric eigendecomposition with eigenvalues clamped to `floor`.
PsdRepair repair_psd(const Eigen::MatrixXd& symmetric, double floor);

struct FullCovResult {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd raw;     // sigma^4 H + sigma^2 I before repair
  double repair = 0.0;
};
// Throws CapabilityError when the model has no symmetric Hessian.
FullCovResult mm_full_cov(const EnergyModel& model, const Eigen::VectorXd& noisy, NoiseLevel level);
inline FullCovResult mm_full_cov(const EnergyModel& model, const Eigen::VectorXd& noisy,
                                 double sigma) {
  return mm_full_cov(model, noisy, NoiseLevel::Single(sigma));
}

// (1/S) sum_s v_s * (H v_s) for the given probe columns; H = grad^2 log q~.
Eigen::VectorXd rademacher_diag(const EnergyModel& model, const Eigen::VectorXd& noisy,
                                double condition, const Eigen::MatrixXd& probes);

// Every sign vector in {-1, +1}^d as columns (2^d of them).
Eigen::MatrixXd all_sign_vectors(int dim);

struct DiagCovResult {
  Eigen::VectorXd variances;  // clamped
  Eigen::VectorXd raw;        // sigma^4 diag + sigma^2, before clamping
};
DiagCovResult mm_diag_cov(const EnergyModel& model, const Eigen::VectorXd& noisy,
                          NoiseLevel level, int samples, double clamp, Rng& rng);
inline DiagCovResult mm_diag_cov(const EnergyModel& model, const Eigen::VectorXd& noisy,
                                 double sigma, int samples, double clamp, Rng& rng) {
  return mm_diag_cov(model, noisy, NoiseLevel::Single(sigma), samples, clamp, rng);
}

struct IsoVariance {
  double variance = 0.0;  // clamped
  double raw = 0.0;       // sigma^2 - sigma^4/d <|s|^2>
  bool clamped = false;
};
// Monte Carlo over `noisy_samples` (rows).
IsoVariance iso_variance(const EnergyModel& model, const Eigen::MatrixXd& noisy_samples,
                         NoiseLevel level, double clamp = kDefaultClamp);
inline IsoVariance iso_variance(const EnergyModel& model, const Eigen::MatrixXd& noisy_samples,
                                double sigma, double clamp = kDefaultClamp) {
  return iso_variance(model, noisy_samples, NoiseLevel::Single(sigma), clamp);
}

// Diagonal Gaussian from the posterior network; log-std clamped to
// [kLogStdMin, kLogStdMax].
GaussianApprox learned_posterior(const PosteriorNet& net, const Eigen::VectorXd& noisy);

GaussianApprox make_full(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                         Provenance provenance = Provenance::kMMFull);
GaussianApprox make_diagonal(Eigen::VectorXd mean, Eigen::VectorXd variances,
                             Provenance provenance = Provenance::kMMDiag);
GaussianApprox make_isotropic(Eigen::VectorXd mean, double variance);

Eigen::VectorXd sample_gaussian(const GaussianApprox& approx, Rng& rng);

// Which approximation a sampler builds at each step.
struct PosteriorSpec {
  Provenance kind = Provenance::kMMFull;
  int rademacher_samples = 3;
  double clamp = kDefaultClamp;
  // Precomputed isotropic variance (kMMIso).
  double iso_variance = 0.0;
  // Required for kLearned.
  const PosteriorNet* net = nullptr;
};

GaussianApprox build_posterior(const EnergyModel& model, const Eigen::VectorXd& noisy,
                               NoiseLevel level, const PosteriorSpec& spec, Rng& rng);

}  // namespace dsmgibbs

#endif  // DSMGIBBS_POSTERIOR_H_
