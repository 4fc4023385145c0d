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
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "dsmgibbs/datasets.h"
#include "dsmgibbs/errors.h"

namespace dsmgibbs {
namespace {

// Direct double loop over the U-statistic.
double NaiveMmd2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::vector<double>& bws) {
  auto k = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    double s = 0.0;
    for (double h : bws) s += std::exp(-(x - y).squaredNorm() / (2 * h * h));
    return s;
  };
  const Eigen::Index m = a.rows(), n = b.rows();
  double aa = 0, bb = 0, ab = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (i != j) aa += k(a.row(i), a.row(j));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) bb += k(b.row(i), b.row(j));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) ab += k(a.row(i), b.row(j));
  return aa / double(m * (m - 1)) + bb / double(n * (n - 1)) - 2 * ab / double(m * n);
}

Eigen::MatrixXd MogPoints(int n, std::uint64_t seed, Eigen::Vector2d shift = Eigen::Vector2d::Zero()) {
  DatasetSpec spec;
  spec.n = n;
  spec.seed = seed;
  Eigen::MatrixXd pts = generate(spec).points;
  pts.rowwise() += shift.transpose();
  return pts;
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dsmgibbs_eval_" + name)).string();
}

TEST(MmdTest, DefaultBandwidths) {
  EXPECT_EQ(default_bandwidths(), (std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0}));
}

TEST(MmdTest, TwoPointHandCase) {
  // A = {p, p}, B = {q, q}: within-set terms are k(0) = 5 (five bandwidths),
  // cross terms k(p, q), so mmd2 = 10 - 2 k(p, q).
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 0, 0, 0;
  b << 1, 0, 1, 0;
  double kpq = 0.0;
  for (double h : default_bandwidths()) kpq += std::exp(-1.0 / (2 * h * h));
  EXPECT_NEAR(mmd(a, b).mmd2, 10.0 - 2.0 * kpq, 1e-14);
}

TEST(MmdTest, DuplicatedPointIsZero) {
  Eigen::MatrixXd a(2, 2);
  a << 0.3, -0.2, 0.3, -0.2;
  EXPECT_NEAR(mmd(a, a).mmd2, 0.0, 1e-15);
}

TEST(MmdTest, MatchesDirectLoops) {
  Rng rng = make_stream(51, 0);
  Eigen::MatrixXd a(37, 2), b(300, 2);
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) = standard_normal(rng, 2).transpose();
  for (Eigen::Index i = 0; i < b.rows(); ++i) b.row(i) = 1.3 * standard_normal(rng, 2).transpose();
  const auto bws = default_bandwidths();
  const MmdReport r = mmd(a, b, bws);
  EXPECT_NEAR(r.mmd2, NaiveMmd2(a, b, bws), 1e-12);
  double sum = 0.0;
  for (double c : r.per_bandwidth) sum += c;
  EXPECT_NEAR(sum, r.mmd2, 1e-13);
  for (std::size_t i = 0; i < bws.size(); ++i) {
    EXPECT_NEAR(r.per_bandwidth[i], NaiveMmd2(a, b, {bws[i]}), 1e-12);
  }
  EXPECT_EQ(r.n_a, 37);
  EXPECT_EQ(r.n_b, 300);
}

TEST(MmdTest, SymmetricBitExact) {
  const Eigen::MatrixXd a = MogPoints(700, 1), b = MogPoints(1200, 2);
  const MmdReport ab = mmd(a, b), ba = mmd(b, a);
  EXPECT_EQ(ab.mmd2, ba.mmd2);
  EXPECT_EQ(ab.per_bandwidth, ba.per_bandwidth);
}

TEST(MmdTest, RejectsDegenerateInput) {
  EXPECT_THROW(mmd(Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(5, 2)), ConfigError);
  EXPECT_THROW(mmd(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(3, 3)), ConfigError);
  EXPECT_THROW(mmd(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(3, 2), {1.0, -1.0}),
               ConfigError);
}

TEST(MmdTest, NullAtBenchmarkScale) {
  const MmdReport r = mmd(MogPoints(10000, 3), MogPoints(10000, 4));
  EXPECT_LE(std::abs(r.mmd2), 0.005);
}

TEST(MmdTest, ShiftedMixtureExceedsPermutationNull) {
  const int n = 1000;
  const Eigen::MatrixXd a = MogPoints(n, 5);
  const Eigen::MatrixXd b = MogPoints(n, 6, Eigen::Vector2d(1.0, 0.0));
  const double observed = mmd(a, b).mmd2;
  Eigen::MatrixXd pooled(2 * n, 2);
  pooled << a, b;
  std::vector<double> null;
  Rng rng = make_stream(7, 0);
  std::vector<int> idx(2 * n);
  for (int p = 0; p < 100; ++p) {
    for (int i = 0; i < 2 * n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    Eigen::MatrixXd x(n, 2), y(n, 2);
    for (int i = 0; i < n; ++i) {
      x.row(i) = pooled.row(idx[i]);
      y.row(i) = pooled.row(idx[n + i]);
    }
    null.push_back(mmd(x, y).mmd2);
  }
  std::sort(null.begin(), null.end());
  EXPECT_GT(observed, 0.0);
  EXPECT_GT(observed, null[98]);
  // Same comparison at the benchmark sample size against the n-scaled null.
  const double big = mmd(MogPoints(10000, 8), MogPoints(10000, 9, Eigen::Vector2d(1.0, 0.0))).mmd2;
  EXPECT_GT(big, null[98] * n / 10000.0);
}

TEST(MmdTest, UnbiasedUnderNull) {
  std::vector<double> values;
  for (int s = 0; s < 100; ++s) values.push_back(mmd(MogPoints(300, 100 + 2 * s), MogPoints(300, 101 + 2 * s)).mmd2);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= double(values.size() - 1);
  EXPECT_LE(std::abs(mean), 2 * std::sqrt(var / double(values.size())));
}

TEST(MmdTest, DistanceIsClampedRoot) {
  MmdReport r;
  r.mmd2 = -0.01;
  EXPECT_EQ(r.distance(), 0.0);
  r.mmd2 = 0.25;
  EXPECT_EQ(r.distance(), 0.5);
}

TEST(MmdTest, CsvRow) {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 0, 1, 1;
  b << 0, 1, 1, 0;
  const std::string path = TempPath("mmd.csv");
  write_mmd_csv(mmd(a, b, {0.5, 2.0}), 17, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "seed,n_a,n_b,mmd2,bw_0.5,bw_2");
  EXPECT_EQ(row.rfind("17,2,2,", 0), 0u);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5);
}

TEST(GridOracleTest, SingleGaussianMatchesClosedForm) {
  const double sd = 0.3, sigma = 0.2;
  const Eigen::Vector2d mu(0.1, -0.2), xt(0.5, 0.4);
  const auto g = GaussianMixture::SingleGaussian(mu, sd);
  const double var = sd * sd * sigma * sigma / (sd * sd + sigma * sigma);
  const Eigen::Vector2d mean = (sigma * sigma * mu + sd * sd * xt) / (sd * sd + sigma * sigma);
  const double half = 6 * std::sqrt(var);
  const GridOracle grid(g, mean.array() - half, mean.array() + half, 401);
  const GridMoments m = grid_posterior_moments(grid, sigma, xt);
  EXPECT_LE((m.mean - mean).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((m.cov - var * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(m.normalization, 1.0, 1e-4);
}

TEST(GridOracleTest, SymmetricPointHasZeroMean) {
  const GridOracle grid = GridOracle::Default(GaussianMixture::FourModes(0.2));
  const GridMoments m = grid_posterior_moments(grid, 0.2, Eigen::Vector2d::Zero());
  EXPECT_LE(m.mean.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(m.normalization, 1.0, 1e-4);
}

TEST(GridOracleTest, ConvergesUnderRefinement) {
  const auto mog = GaussianMixture::FourModes(0.2);
  const Eigen::Vector2d lo(-2, -2), hi(2, 2), xt(0.8, 0.9);
  const GridMoments coarse = grid_posterior_moments(GridOracle(mog, lo, hi, 201), 0.2, xt);
  const GridMoments fine = grid_posterior_moments(GridOracle(mog, lo, hi, 401), 0.2, xt);
  EXPECT_LE((coarse.mean - fine.mean).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LE((coarse.cov - fine.cov).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(GridOracleTest, CoarseGridIsRejected) {
  const auto mog = GaussianMixture::FourModes(0.2);
  const GridOracle tiny(mog, Eigen::Vector2d(-2, -2), Eigen::Vector2d(2, 2), 3);
  EXPECT_THROW(grid_posterior_moments(tiny, 0.2, Eigen::Vector2d(0.8, 0.9)), ConfigError);
  EXPECT_THROW(GridOracle(mog, Eigen::Vector2d(-2, -2), Eigen::Vector2d(2, 2), 2), ConfigError);
}

TEST(GridOracleTest, PosteriorGridCsv) {
  const auto mog = GaussianMixture::FourModes(0.2);
  const GridOracle grid(mog, Eigen::Vector2d(-2, -2), Eigen::Vector2d(2, 2), 11);
  const std::string path = TempPath("grid.csv");
  write_posterior_grid_csv(grid, 0.2, Eigen::Vector2d(0.8, 0.9),
                           make_isotropic(Eigen::Vector2d(0.8, 0.9), 0.04), path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x1,x2,true_log_density,approx_log_density");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 121);
}

TEST(ModeCoverageTest, TrivialCases) {
  const auto means = GaussianMixture::FourModes().means;
  Eigen::MatrixXd at_one(5, 2);
  at_one.rowwise() = means[2].transpose();
  EXPECT_EQ(mode_coverage(at_one, means, 0.3), (std::vector<double>{0, 0, 1, 0}));
  EXPECT_EQ(mode_coverage(MogPoints(100, 1), means, 0.0), (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(nearest_mode_fractions(at_one, means), (std::vector<double>{0, 0, 1, 0}));
}

TEST(ModeCoverageTest, ExactMixtureDrawsMatchChiSquareMass) {
  const int n = 100000;
  const auto cover = mode_coverage(MogPoints(n, 11), GaussianMixture::FourModes().means, 0.3);
  // P(|z| <= r / sigma_g) for a 2D standard normal is 1 - exp(-r^2 / (2 sigma_g^2)).
  const double p = 0.25 * (1.0 - std::exp(-0.09 / (2 * 0.04)));
  for (double c : cover) EXPECT_LE(std::abs(c - p), 3 * std::sqrt(p * (1 - p) / n));
}

TEST(ModeCoverageTest, NearestFractionsSumToOne) {
  const auto f = nearest_mode_fractions(MogPoints(4000, 12), GaussianMixture::FourModes().means);
  double s = 0;
  for (double v : f) {
    s += v;
    EXPECT_NEAR(v, 0.25, 0.03);
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(EssTest, IndependentSeries) {
  Rng rng = make_stream(13, 0);
  const Eigen::VectorXd x = standard_normal(rng, 20000);
  EXPECT_NEAR(effective_sample_size(x) / 20000.0, 1.0, 0.1);
}

TEST(EssTest, AutoregressiveSeries) {
  Rng rng = make_stream(14, 0);
  const int n = 100000;
  const double rho = 0.9;
  Eigen::VectorXd x(n);
  x[0] = 0;
  const Eigen::VectorXd z = standard_normal(rng, n);
  for (int i = 1; i < n; ++i) x[i] = rho * x[i - 1] + std::sqrt(1 - rho * rho) * z[i];
  const double expected = n * (1 - rho) / (1 + rho);
  EXPECT_NEAR(effective_sample_size(x) / expected, 1.0, 0.15);
}

}  // namespace
}  // namespace dsmgibbs
