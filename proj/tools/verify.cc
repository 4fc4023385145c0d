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

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "commands.h"
#include "dsmgibbs/evaluation.h"

namespace dsmgibbs::cli {
namespace {

constexpr double kSigma = 0.2;

std::string line(const char* name, double measured, double tolerance, bool& all_pass) {
  const bool ok = measured <= tolerance;
  all_pass = all_pass && ok;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-28s %s measured=%.3e tolerance=%.1e", name,
                ok ? "PASS" : "FAIL", measured, tolerance);
  return buf;
}

std::vector<Eigen::VectorXd> noisy_points(const GaussianMixture& mog, int n, Rng& rng) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) out.push_back(mog_sample(mog, rng) + kSigma * standard_normal(rng, 2));
  return out;
}

// Five-point central difference Jacobian of the posterior mean.
Eigen::MatrixXd mean_jacobian(const EnergyModel& model, const Eigen::VectorXd& xt, double h) {
  Eigen::MatrixXd jac(xt.size(), xt.size());
  for (Eigen::Index j = 0; j < xt.size(); ++j) {
    auto at = [&](double t) {
      Eigen::VectorXd y = xt;
      y[j] += t;
      return mm_mean(model, y, kSigma);
    };
    jac.col(j) = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12.0 * h);
  }
  return jac;
}

}  // namespace

std::vector<std::string> verify_identities(bool& all_pass) {
  all_pass = true;
  std::vector<std::string> lines;
  const GaussianMixture mog = GaussianMixture::FourModes(0.2);
  const MixtureModel model(mog);
  const GridOracle grid = GridOracle::Default(mog);
  Rng rng = make_stream(0, 0x7665726966);
  const std::vector<Eigen::VectorXd> probes = noisy_points(mog, 10, rng);

  double mean_err = 0.0, cov_err = 0.0, jac_err = 0.0, rad_err = 0.0;
  for (const Eigen::VectorXd& xt : probes) {
    const GridMoments ref = grid_posterior_moments(grid, kSigma, xt);
    const FullCovResult full = mm_full_cov(model, xt, kSigma);
    mean_err = std::max(mean_err, (mm_mean(model, xt, kSigma) - ref.mean).cwiseAbs().maxCoeff());
    cov_err = std::max(cov_err, (full.cov - ref.cov).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd scaled = kSigma * kSigma * mean_jacobian(model, xt, 1e-3);
    jac_err = std::max(jac_err, (full.raw - scaled).cwiseAbs().maxCoeff() /
                                    full.raw.cwiseAbs().maxCoeff());
    const Eigen::VectorXd h = rademacher_diag(model, xt, kSigma, all_sign_vectors(2));
    const Eigen::VectorXd diag = std::pow(kSigma, 4) * h.array() + kSigma * kSigma;
    rad_err = std::max(rad_err, (diag - full.raw.diagonal()).cwiseAbs().maxCoeff());
  }
  lines.push_back(line("posterior mean vs grid", mean_err, 1e-3, all_pass));
  lines.push_back(line("covariance vs grid", cov_err, 1e-3, all_pass));
  lines.push_back(line("covariance vs mean jacobian", jac_err, 1e-5, all_pass));
  lines.push_back(line("rademacher exhaustive", rad_err, 1e-12, all_pass));

  // Single Gaussian: all posteriors reduce to the conjugate update.
  const double sd = 0.5;
  const Eigen::Vector2d mu(0.3, -0.6);
  const MixtureModel gauss(GaussianMixture::SingleGaussian(mu, sd));
  const double v = sd * sd + kSigma * kSigma;
  const double var = sd * sd * kSigma * kSigma / v;
  double closed = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd xt = mu + std::sqrt(v) * standard_normal(rng, 2);
    const Eigen::VectorXd mean = (kSigma * kSigma * mu + sd * sd * xt) / v;
    closed = std::max(closed, (mm_mean(gauss, xt, kSigma) - mean).cwiseAbs().maxCoeff());
    closed = std::max(closed, (mm_full_cov(gauss, xt, kSigma).cov -
                               var * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
    closed = std::max(closed, (mm_diag_cov(gauss, xt, kSigma, 3, kDefaultClamp, rng).variances
                                   .array() - var).abs().maxCoeff());
  }
  Eigen::MatrixXd cubature(4, 2);
  const double r = std::sqrt(2.0 * v);
  cubature << mu[0] + r, mu[1], mu[0] - r, mu[1], mu[0], mu[1] + r, mu[0], mu[1] - r;
  closed = std::max(closed, std::abs(iso_variance(gauss, cubature, kSigma).variance - var));
  lines.push_back(line("gaussian closed form", closed, 1e-10, all_pass));

  // Isotropic variance equals the average covariance trace per dimension.
  const std::vector<Eigen::VectorXd> noisy = noisy_points(mog, 100000, rng);
  Eigen::MatrixXd rows(Eigen::Index(noisy.size()), 2);
  double trace_avg = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    rows.row(Eigen::Index(i)) = noisy[i].transpose();
    trace_avg += mm_full_cov(model, noisy[i], kSigma).cov.trace() / 2.0;
  }
  trace_avg /= double(noisy.size());
  const double iso = iso_variance(model, rows, kSigma).variance;
  lines.push_back(line("isotropic vs trace average", std::abs(iso - trace_avg) / trace_avg, 0.02,
                       all_pass));
  return lines;
}

}  // namespace dsmgibbs::cli
