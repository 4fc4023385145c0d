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

#include "dsmgibbs/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "dsmgibbs/errors.h"

namespace dsmgibbs {
namespace {

// Rows processed per block. Fixed so the reduction order never depends on
// anything but the inputs.
constexpr Eigen::Index kBlock = 256;

bool precedes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) != b(i, j)) return a(i, j) < b(i, j);
    }
  }
  return false;
}

// Sum over rows i of `x` and all rows j of `y` (j > i when `upper_only`) of
// exp(-|x_i - y_j|^2 * coef_h), per bandwidth.
std::vector<double> kernel_sums(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                const std::vector<double>& coef, bool upper_only) {
  const Eigen::Index dim = x.cols();
  // Column-major copies of y's coordinates for vectorized distance rows.
  std::vector<Eigen::ArrayXd> ycols;
  for (Eigen::Index k = 0; k < dim; ++k) ycols.emplace_back(y.col(k).array());

  std::vector<double> total(coef.size(), 0.0);
  for (Eigen::Index start = 0; start < x.rows(); start += kBlock) {
    std::vector<double> block(coef.size(), 0.0);
    const Eigen::Index stop = std::min(x.rows(), start + kBlock);
    for (Eigen::Index i = start; i < stop; ++i) {
      const Eigen::Index first = upper_only ? i + 1 : 0;
      const Eigen::Index count = y.rows() - first;
      if (count <= 0) continue;
      Eigen::ArrayXd dist2 = Eigen::ArrayXd::Zero(count);
      for (Eigen::Index k = 0; k < dim; ++k) {
        dist2 += (ycols[std::size_t(k)].segment(first, count) - x(i, k)).square();
      }
      for (std::size_t h = 0; h < coef.size(); ++h) block[h] += (-coef[h] * dist2).exp().sum();
    }
    for (std::size_t h = 0; h < coef.size(); ++h) total[h] += block[h];
  }
  return total;
}

}  // namespace

double MmdReport::distance() const { return std::sqrt(std::max(mmd2, 0.0)); }

std::vector<double> default_bandwidths() { return {0.25, 0.5, 1.0, 2.0, 4.0}; }

MmdReport mmd(const Eigen::MatrixXd& a_in, const Eigen::MatrixXd& b_in,
              const std::vector<double>& bandwidths) {
  if (a_in.rows() < 2 || b_in.rows() < 2) throw ConfigError("MMD needs at least 2 points per set");
  if (a_in.cols() != b_in.cols()) throw ConfigError("MMD sets have different dimensions");
  if (bandwidths.empty()) throw ConfigError("MMD needs at least one bandwidth");
  std::vector<double> coef;
  for (double h : bandwidths) {
    if (!(h > 0.0)) throw ConfigError("MMD bandwidths must be positive");
    coef.push_back(0.5 / (h * h));
  }
  // Canonical argument order makes the estimate exactly symmetric.
  const bool swap = precedes(b_in, a_in);
  const Eigen::MatrixXd& a = swap ? b_in : a_in;
  const Eigen::MatrixXd& b = swap ? a_in : b_in;

  const double m = double(a.rows());
  const double n = double(b.rows());
  const std::vector<double> kaa = kernel_sums(a, a, coef, true);
  const std::vector<double> kbb = kernel_sums(b, b, coef, true);
  const std::vector<double> kab = kernel_sums(a, b, coef, false);

  MmdReport report;
  report.bandwidths = bandwidths;
  report.n_a = a_in.rows();
  report.n_b = b_in.rows();
  for (std::size_t h = 0; h < coef.size(); ++h) {
    const double within = 2.0 * kaa[h] / (m * (m - 1.0)) + 2.0 * kbb[h] / (n * (n - 1.0));
    const double contribution = within - 2.0 * kab[h] / (m * n);
    report.per_bandwidth.push_back(contribution);
    report.mmd2 += contribution;
  }
  return report;
}

void write_mmd_csv(const MmdReport& report, std::uint64_t seed, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char buf[64];
  out << "seed,n_a,n_b,mmd2";
  for (double h : report.bandwidths) {
    std::snprintf(buf, sizeof(buf), "%.17g", h);
    out << ",bw_" << buf;
  }
  out << '\n' << seed << ',' << report.n_a << ',' << report.n_b;
  std::snprintf(buf, sizeof(buf), "%.17g", report.mmd2);
  out << ',' << buf;
  for (double c : report.per_bandwidth) {
    std::snprintf(buf, sizeof(buf), "%.17g", c);
    out << ',' << buf;
  }
  out << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

GridOracle::GridOracle(GaussianMixture mog, Eigen::VectorXd lower, Eigen::VectorXd upper,
                       int nodes)
    : mog_(std::move(mog)), lower_(std::move(lower)), upper_(std::move(upper)), nodes_(nodes) {
  mog_.validate();
  if (nodes_ < 3) throw ConfigError("grid needs at least 3 nodes per dimension");
  if (lower_.size() != mog_.dim() || upper_.size() != mog_.dim()) {
    throw ConfigError("grid box dimension does not match the mixture");
  }
  if (!((upper_ - lower_).array() > 0.0).all()) throw ConfigError("grid box is empty");
  const int d = dim();
  Eigen::Index total = 1;
  for (int k = 0; k < d; ++k) total *= nodes_;
  weights_.resize(total);
  log_prior_.resize(total);
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    double w = 1.0;
    Eigen::Index rest = flat;
    for (int k = 0; k < d; ++k) {
      const Eigen::Index idx = rest % nodes_;
      rest /= nodes_;
      const double h = (upper_[k] - lower_[k]) / double(nodes_ - 1);
      w *= (idx == 0 || idx == nodes_ - 1) ? 0.5 * h : h;
    }
    weights_[flat] = w;
    log_prior_[flat] = mog_logpdf(mog_, node(flat));
  }
}

GridOracle GridOracle::Default(GaussianMixture mog) {
  const int d = mog.dim();
  return GridOracle(std::move(mog), Eigen::VectorXd::Constant(d, -2.0),
                    Eigen::VectorXd::Constant(d, 2.0), 401);
}

Eigen::VectorXd GridOracle::node(Eigen::Index flat) const {
  const int d = dim();
  Eigen::VectorXd x(d);
  Eigen::Index rest = flat;
  for (int k = 0; k < d; ++k) {
    const Eigen::Index idx = rest % nodes_;
    rest /= nodes_;
    x[k] = lower_[k] + (upper_[k] - lower_[k]) * double(idx) / double(nodes_ - 1);
  }
  return x;
}

GridMoments grid_posterior_moments(const GridOracle& grid, double sigma,
                                   const Eigen::VectorXd& noisy) {
  if (!(sigma > 0.0)) throw ConfigError("posterior needs sigma > 0");
  if (noisy.size() != grid.dim()) throw ConfigError("noisy point dimension does not match grid");
  const int d = grid.dim();
  const double var = sigma * sigma;
  const double log_norm = -0.5 * double(d) * std::log(2.0 * std::numbers::pi * var) -
                          mog_logpdf(noisy_mog(grid.mixture(), sigma), noisy);
  double z = 0.0;
  Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
    const Eigen::VectorXd x = grid.node(flat);
    const double log_p =
        grid.log_prior(flat) - 0.5 * (noisy - x).squaredNorm() / var + log_norm;
    const double w = grid.weight(flat) * std::exp(log_p);
    if (w == 0.0) continue;
    z += w;
    first += w * x;
    second += w * x * x.transpose();
  }
  if (std::abs(z - 1.0) > 1e-2) {
    throw ConfigError("grid too coarse: posterior normalization " + std::to_string(z));
  }
  GridMoments out;
  out.normalization = z;
  out.mean = first / z;
  out.cov = second / z - out.mean * out.mean.transpose();
  return out;
}

void write_posterior_grid_csv(const GridOracle& grid, double sigma, const Eigen::VectorXd& noisy,
                              const GaussianApprox& approx, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (int k = 0; k < grid.dim(); ++k) out << 'x' << k + 1 << ',';
  out << "true_log_density,approx_log_density\n";
  char buf[64];
  for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
    const Eigen::VectorXd x = grid.node(flat);
    for (int k = 0; k < grid.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g,", x[k]);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g,",
                  true_posterior_logpdf(grid.mixture(), sigma, noisy, x));
    out << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", approx.logpdf(x));
    out << buf << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<double> mode_coverage(const Eigen::MatrixXd& samples,
                                  const std::vector<Eigen::VectorXd>& means, double radius) {
  if (radius < 0.0) throw ConfigError("coverage radius must be nonnegative");
  std::vector<double> out(means.size(), 0.0);
  if (samples.rows() == 0) return out;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (std::size_t k = 0; k < means.size(); ++k) {
      if (radius > 0.0 && (samples.row(i).transpose() - means[k]).norm() <= radius) out[k] += 1.0;
    }
  }
  for (double& f : out) f /= double(samples.rows());
  return out;
}

std::vector<double> nearest_mode_fractions(const Eigen::MatrixXd& samples,
                                           const std::vector<Eigen::VectorXd>& means) {
  if (means.empty()) throw ConfigError("need at least one mode");
  std::vector<double> out(means.size(), 0.0);
  if (samples.rows() == 0) return out;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    std::size_t best = 0;
    double best_d = (samples.row(i).transpose() - means[0]).squaredNorm();
    for (std::size_t k = 1; k < means.size(); ++k) {
      const double dk = (samples.row(i).transpose() - means[k]).squaredNorm();
      if (dk < best_d) {
        best_d = dk;
        best = k;
      }
    }
    out[best] += 1.0;
  }
  for (double& f : out) f /= double(samples.rows());
  return out;
}

double effective_sample_size(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size();
  if (n < 4) return double(n);
  const Eigen::VectorXd centered = series.array() - series.mean();
  const double var0 = centered.squaredNorm() / double(n);
  if (var0 == 0.0) return double(n);
  auto rho = [&](Eigen::Index lag) {
    return centered.head(n - lag).dot(centered.tail(n - lag)) / (double(n) * var0);
  };
  // Sum pairs Gamma_k = rho(2k) + rho(2k+1) while positive, kept monotone.
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
    double gamma = rho(2 * k) + rho(2 * k + 1);
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, prev);
    prev = gamma;
    sum += gamma;
  }
  const double tau = std::max(2.0 * sum - 1.0, 1.0 / double(n));
  return double(n) / tau;
}

}  // namespace dsmgibbs
