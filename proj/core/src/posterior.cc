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

#include "dsmgibbs/posterior.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dsmgibbs/errors.h"

namespace dsmgibbs {
namespace {

void check_level(const EnergyModel& model, const Eigen::VectorXd& noisy, NoiseLevel level) {
  if (!(level.sigma > 0.0)) throw ConfigError("posterior needs sigma > 0");
  if (noisy.size() != model.dim()) throw ConfigError("point dimension does not match the model");
}

}  // namespace

std::string to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kMMFull: return "full";
    case Provenance::kMMDiag: return "diag";
    case Provenance::kMMIso: return "iso";
    case Provenance::kLearned: return "learned";
  }
  return "unknown";
}

Eigen::MatrixXd GaussianApprox::dense_cov() const {
  const Eigen::Index d = mean.size();
  if (const auto* full = std::get_if<FullCov>(&cov)) return full->matrix;
  if (const auto* diag = std::get_if<DiagonalCov>(&cov)) return diag->variances.asDiagonal();
  return std::get<IsotropicCov>(cov).variance * Eigen::MatrixXd::Identity(d, d);
}

double GaussianApprox::logpdf(const Eigen::VectorXd& x) const {
  const double d = double(mean.size());
  const Eigen::VectorXd diff = x - mean;
  if (const auto* full = std::get_if<FullCov>(&cov)) {
    const Eigen::MatrixXd& l = chol.size() ? chol : Eigen::MatrixXd(full->matrix.llt().matrixL());
    const Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(diff);
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    return -0.5 * (w.squaredNorm() + log_det + d * std::log(2.0 * std::numbers::pi));
  }
  const Eigen::VectorXd var = dense_cov().diagonal();
  return -0.5 * ((diff.array().square() / var.array()).sum() + var.array().log().sum() +
                 d * std::log(2.0 * std::numbers::pi));
}

Eigen::VectorXd mm_mean(const EnergyModel& model, const Eigen::VectorXd& noisy, NoiseLevel level) {
  check_level(model, noisy, level);
  return noisy + level.sigma * level.sigma * model.score(noisy, level.condition);
}

PsdRepair repair_psd(const Eigen::MatrixXd& symmetric, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric);
  if (eig.info() != Eigen::Success) throw InternalError("eigendecomposition failed");
  const Eigen::VectorXd& values = eig.eigenvalues();
  if (values.minCoeff() >= floor) return {symmetric, 0.0};
  const Eigen::VectorXd clamped = values.cwiseMax(floor);
  PsdRepair out;
  out.matrix = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  out.magnitude = (out.matrix - symmetric).norm();
  return out;
}

FullCovResult mm_full_cov(const EnergyModel& model, const Eigen::VectorXd& noisy,
                          NoiseLevel level) {
  check_level(model, noisy, level);
  if (!model.has_exact_hessian()) {
    throw CapabilityError("full covariance needs a symmetric Hessian; this model is score-"
                          "parameterized, use the diagonal covariance");
  }
  const double var = level.sigma * level.sigma;
  const Eigen::Index d = noisy.size();
  FullCovResult out;
  out.raw = var * var * model.hessian(noisy, level.condition) +
            var * Eigen::MatrixXd::Identity(d, d);
  PsdRepair repaired = repair_psd(out.raw, 1e-8 * var);
  out.cov = std::move(repaired.matrix);
  out.repair = repaired.magnitude;
  return out;
}

Eigen::VectorXd rademacher_diag(const EnergyModel& model, const Eigen::VectorXd& noisy,
                                double condition, const Eigen::MatrixXd& probes) {
  if (probes.cols() == 0 || probes.rows() != noisy.size()) {
    throw ConfigError("probe matrix must have d rows and at least one column");
  }
  const Eigen::MatrixXd hv = model.hvp_many(noisy, probes, condition);
  return probes.cwiseProduct(hv).rowwise().mean();
}

Eigen::MatrixXd all_sign_vectors(int dim) {
  if (dim < 1 || dim > 20) throw ConfigError("exhaustive sign vectors need 1 <= d <= 20");
  const Eigen::Index count = Eigen::Index(1) << dim;
  Eigen::MatrixXd out(dim, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    for (int k = 0; k < dim; ++k) out(k, j) = ((j >> k) & 1) ? 1.0 : -1.0;
  }
  return out;
}

DiagCovResult mm_diag_cov(const EnergyModel& model, const Eigen::VectorXd& noisy,
                          NoiseLevel level, int samples, double clamp, Rng& rng) {
  check_level(model, noisy, level);
  if (samples < 1) throw ConfigError("Rademacher sample count must be at least 1");
  if (!(clamp > 0.0)) throw ConfigError("variance clamp must be positive");
  const Eigen::Index d = noisy.size();
  Eigen::MatrixXd probes(d, samples);
  for (int s = 0; s < samples; ++s) probes.col(s) = rademacher(rng, d);
  const double var = level.sigma * level.sigma;
  DiagCovResult out;
  out.raw = var * var * rademacher_diag(model, noisy, level.condition, probes).array() + var;
  out.variances = out.raw.cwiseMax(clamp);
  return out;
}

IsoVariance iso_variance(const EnergyModel& model, const Eigen::MatrixXd& noisy_samples,
                         NoiseLevel level, double clamp) {
  if (noisy_samples.rows() == 0) throw ConfigError("isotropic variance needs samples");
  if (!(level.sigma > 0.0)) throw ConfigError("posterior needs sigma > 0");
  if (noisy_samples.cols() != model.dim()) throw ConfigError("sample dimension mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < noisy_samples.rows(); ++i) {
    total += model.score(noisy_samples.row(i).transpose(), level.condition).squaredNorm();
  }
  const double mean_sq = total / double(noisy_samples.rows());
  const double var = level.sigma * level.sigma;
  IsoVariance out;
  out.raw = var - var * var * mean_sq / double(model.dim());
  out.clamped = out.raw < clamp;
  out.variance = std::max(out.raw, clamp);
  return out;
}

GaussianApprox learned_posterior(const PosteriorNet& net, const Eigen::VectorXd& noisy) {
  const PosteriorNet::Output out = net.evaluate(noisy);
  const Eigen::VectorXd log_std = out.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  return make_diagonal(out.mean, (2.0 * log_std.array()).exp(), Provenance::kLearned);
}

GaussianApprox make_full(Eigen::VectorXd mean, Eigen::MatrixXd cov, Provenance provenance) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw ConfigError("covariance shape does not match mean");
  }
  GaussianApprox g;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw InternalError("Cholesky factorization failed on a repaired covariance");
  }
  g.chol = llt.matrixL();
  g.mean = std::move(mean);
  g.cov = FullCov{std::move(cov)};
  g.provenance = provenance;
  return g;
}

GaussianApprox make_diagonal(Eigen::VectorXd mean, Eigen::VectorXd variances,
                             Provenance provenance) {
  if (variances.size() != mean.size()) throw ConfigError("variance length does not match mean");
  if (!(variances.array() > 0.0).all()) throw ConfigError("diagonal variances must be positive");
  GaussianApprox g;
  g.mean = std::move(mean);
  g.cov = DiagonalCov{std::move(variances)};
  g.provenance = provenance;
  return g;
}

GaussianApprox make_isotropic(Eigen::VectorXd mean, double variance) {
  if (!(variance > 0.0)) throw ConfigError("isotropic variance must be positive");
  GaussianApprox g;
  g.mean = std::move(mean);
  g.cov = IsotropicCov{variance};
  g.provenance = Provenance::kMMIso;
  return g;
}

Eigen::VectorXd sample_gaussian(const GaussianApprox& approx, Rng& rng) {
  const Eigen::VectorXd z = standard_normal(rng, approx.mean.size());
  if (const auto* full = std::get_if<FullCov>(&approx.cov)) {
    if (approx.chol.size() == 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(full->matrix);
      if (llt.info() != Eigen::Success) throw InternalError("Cholesky factorization failed");
      return approx.mean + Eigen::MatrixXd(llt.matrixL()) * z;
    }
    return approx.mean + approx.chol * z;
  }
  if (const auto* diag = std::get_if<DiagonalCov>(&approx.cov)) {
    return approx.mean + diag->variances.cwiseSqrt().cwiseProduct(z);
  }
  return approx.mean + std::sqrt(std::get<IsotropicCov>(approx.cov).variance) * z;
}

GaussianApprox build_posterior(const EnergyModel& model, const Eigen::VectorXd& noisy,
                               NoiseLevel level, const PosteriorSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case Provenance::kMMFull:
      return make_full(mm_mean(model, noisy, level), mm_full_cov(model, noisy, level).cov);
    case Provenance::kMMDiag:
      return make_diagonal(
          mm_mean(model, noisy, level),
          mm_diag_cov(model, noisy, level, spec.rademacher_samples, spec.clamp, rng).variances);
    case Provenance::kMMIso:
      return make_isotropic(mm_mean(model, noisy, level), spec.iso_variance);
    case Provenance::kLearned:
      if (spec.net == nullptr) throw CapabilityError("learned posterior needs a posterior network");
      if (level.sigma != level.condition) {
        throw CapabilityError("learned posterior is trained for a single noise level");
      }
      return learned_posterior(*spec.net, noisy);
  }
  throw InternalError("unknown posterior kind");
}

}  // namespace dsmgibbs
