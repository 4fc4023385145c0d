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

#ifndef DSMGIBBS_EVALUATION_H_
#define DSMGIBBS_EVALUATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsmgibbs/models.h"
#include "dsmgibbs/posterior.h"

namespace dsmgibbs {

struct MmdReport {
  double mmd2 = 0.0;                  // unbiased; may be slightly negative
  std::vector<double> per_bandwidth;  // sums to mmd2
  std::vector<double> bandwidths;
  Eigen::Index n_a = 0;
  Eigen::Index n_b = 0;

  // sqrt(max(mmd2, 0)), for display.
  double distance() const;
};

std::vector<double> default_bandwidths();  // 0.25, 0.5, 1, 2, 4

// Unbiased U-statistic with k(x, y) = sum_h exp(-|x - y|^2 / (2 h^2)).
// Rows are points. mmd(A, B) and mmd(B, A) are bit-identical.
MmdReport mmd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
              const std::vector<double>& bandwidths = default_bandwidths());

// Row: seed,n_a,n_b,mmd2,<one column per bandwidth>.
void write_mmd_csv(const MmdReport& report, std::uint64_t seed, const std::string& path);

// Tensor-product trapezoid grid with cached log p_d at every node.
class GridOracle {
 public:
  GridOracle(GaussianMixture mog, Eigen::VectorXd lower, Eigen::VectorXd upper, int nodes);
  // Default box [-2, 2]^d with 401 nodes per axis.
  static GridOracle Default(GaussianMixture mog);

  const GaussianMixture& mixture() const { return mog_; }
  int dim() const { return int(lower_.size()); }
  int nodes() const { return nodes_; }
  Eigen::Index size() const { return Eigen::Index(weights_.size()); }
  Eigen::VectorXd node(Eigen::Index flat) const;
  double weight(Eigen::Index flat) const { return weights_[flat]; }
  double log_prior(Eigen::Index flat) const { return log_prior_[flat]; }

 private:
  GaussianMixture mog_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  int nodes_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd log_prior_;
};

struct GridMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double normalization = 0.0;  // quadrature of p(x | xt); ~1 on a good grid
};

// Brute-force posterior moments of the analytic mixture. Throws ConfigError
// ("grid too coarse") when the normalization is off by more than 1e-2.
GridMoments grid_posterior_moments(const GridOracle& grid, double sigma,
                                   const Eigen::VectorXd& noisy);

// Per-node dump for plotting: x1..xd, true_log_density, approx_log_density.
void write_posterior_grid_csv(const GridOracle& grid, double sigma, const Eigen::VectorXd& noisy,
                              const GaussianApprox& approx, const std::string& path);

// Fraction of rows within `radius` of each mean (need not sum to 1).
std::vector<double> mode_coverage(const Eigen::MatrixXd& samples,
                                  const std::vector<Eigen::VectorXd>& means, double radius);
// Fraction of rows whose nearest mean is each mean (sums to 1).
std::vector<double> nearest_mode_fractions(const Eigen::MatrixXd& samples,
                                           const std::vector<Eigen::VectorXd>& means);

// Geyer initial-positive-sequence effective sample size of a scalar series.
double effective_sample_size(const Eigen::VectorXd& series);

}  // namespace dsmgibbs

#endif  // DSMGIBBS_EVALUATION_H_
