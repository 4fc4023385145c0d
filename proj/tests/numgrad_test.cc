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

#include "dsmgibbs/numgrad.h"

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dsmgibbs/errors.h"
#include "test_util.h"

namespace dsmgibbs::numgrad {
namespace {

using testing::fd_gradient;
using testing::max_relative_error;
using testing::naive_energy;
using testing::naive_forward;
using testing::relative_error;

MlpParams RandomNet(std::vector<int> widths, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  MlpParams p = MlpParams::Random(widths, rng);
  // Nonzero biases so every code path sees them.
  for (auto& layer : p.mutable_layers()) layer.bias = 0.3 * standard_normal(rng, layer.bias.size());
  return p;
}

// Central differences of the DSM term under a change of one flat parameter.
double DsmTermAt(const MlpParams& base, const Eigen::VectorXd& flat, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& xt, double sigma) {
  MlpParams p = base;
  p.assign(flat);
  const Eigen::VectorXd grad_fd = fd_gradient(
      [&](const Eigen::VectorXd& y) { return naive_energy(p, y); }, xt, 1e-5);
  const Eigen::VectorXd r = (xt - x) / (sigma * sigma) - grad_fd;
  return 0.5 * r.squaredNorm();
}

TEST(ForwardTest, ZeroNetworkGivesZero) {
  const std::vector<int> widths{2, 5, 1};
  const MlpParams p = MlpParams::Zeros(widths);
  EXPECT_EQ(forward(p, Eigen::Vector2d(3.0, -7.0)).value[0], 0.0);
  EXPECT_TRUE(grad_input(p, Eigen::Vector2d(0.1, 0.2)).isZero(0.0));
  EXPECT_TRUE(hessian_input(p, Eigen::Vector2d(0.1, 0.2)).hessian.isZero(0.0));
}

TEST(ForwardTest, SingleLinearLayer) {
  Layer layer{Eigen::Matrix2d{{2.0, 0.0}, {0.0, 3.0}}, Eigen::Vector2d::Zero()};
  const MlpParams p({layer});
  const Eigen::VectorXd y = forward(p, Eigen::Vector2d(1.0, 1.0)).value;
  EXPECT_EQ(y[0], 2.0);
  EXPECT_EQ(y[1], 3.0);
}

TEST(ForwardTest, MatchesIndependentReimplementation) {
  const MlpParams p = RandomNet({2, 400, 400, 400, 1}, 0);
  const Eigen::Vector2d x(0.5, -0.5);
  const double fast = forward(p, x).value[0];
  const double slow = naive_forward(p, x)[0];
  EXPECT_LE(relative_error(fast, slow, 1e-12), 1e-12);
}

TEST(ForwardTest, TraceMatchesScalarSwish) {
  const MlpParams p = RandomNet({2, 8, 8, 1}, 1);
  const ForwardResult r = forward(p, Eigen::Vector2d(0.2, 0.9));
  ASSERT_EQ(r.trace.pre.size(), p.layers().size());
  EXPECT_EQ(r.trace.post.back()(0, 0), r.value[0]);
  for (std::size_t l = 0; l + 1 < p.layers().size(); ++l) {
    for (Eigen::Index i = 0; i < r.trace.pre[l].rows(); ++i) {
      const double z = r.trace.pre[l](i, 0);
      EXPECT_LE(relative_error(swish(z), r.trace.post[l + 1](i, 0), 1e-300), 1e-14);
      EXPECT_LE(relative_error(swish_d1(z), r.trace.d1[l](i, 0), 1e-300), 1e-14);
      EXPECT_LE(relative_error(swish_d2(z), r.trace.d2[l](i, 0), 1e-300), 1e-14);
    }
  }
}

TEST(ForwardTest, SaturatedUnitsStayFinite) {
  MlpParams p = MlpParams::Zeros(std::vector<int>{1, 2, 1});
  auto& layers = p.mutable_layers();
  layers[0].weight << 1.0, -1.0;
  layers[1].weight << 1.0, 1.0;
  DualTrace trace;
  const Eigen::MatrixXd out = forward_batch(p, Eigen::MatrixXd::Constant(1, 1, 800.0), &trace);
  EXPECT_DOUBLE_EQ(out(0, 0), 800.0);
  EXPECT_TRUE(trace.d1[0].allFinite());
  EXPECT_TRUE(trace.d2[0].allFinite());
  EXPECT_DOUBLE_EQ(trace.d1[0](1, 0), 0.0);
}

TEST(ForwardTest, RejectsDimensionMismatch) {
  const MlpParams p = RandomNet({2, 4, 1}, 2);
  EXPECT_THROW(forward(p, Eigen::Vector3d(1, 2, 3)), ConfigError);
}

TEST(ParamsTest, RejectsBrokenChain) {
  Layer a{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3)};
  Layer b{Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Zero(1)};
  EXPECT_THROW(MlpParams({a, b}), ConfigError);
  Layer nan{Eigen::MatrixXd::Constant(1, 2, std::nan("")), Eigen::VectorXd::Zero(1)};
  EXPECT_THROW(MlpParams({nan}), ConfigError);
}

TEST(ParamsTest, FlattenAssignRoundTrip) {
  MlpParams p = RandomNet({3, 4, 2}, 3);
  const Eigen::VectorXd flat = p.flatten();
  EXPECT_EQ(flat.size(), p.num_parameters());
  MlpParams q = p.zeros_like();
  q.assign(flat);
  EXPECT_EQ(q.flatten(), flat);
  // Row-major weights come first.
  EXPECT_EQ(flat[1], p.layers()[0].weight(0, 1));
}

TEST(ParamsTest, InitScaleFollowsFanIn) {
  Rng rng = make_stream(5, 0);
  const std::vector<int> widths{400, 400, 1};
  const MlpParams p = MlpParams::Random(widths, rng);
  const Eigen::MatrixXd& w = p.layers()[0].weight;
  const double var = w.squaredNorm() / double(w.size());
  EXPECT_NEAR(var, 1.0 / 400.0, 0.05 / 400.0);
  EXPECT_TRUE(p.layers()[0].bias.isZero(0.0));
}

TEST(SwishTest, DerivativesMatchFiniteDifferences) {
  for (double z : {-30.0, -3.0, -0.5, 0.0, 0.7, 4.0, 25.0}) {
    const double h = 1e-5;
    EXPECT_NEAR(swish_d1(z), (swish(z + h) - swish(z - h)) / (2 * h), 1e-8) << z;
    EXPECT_NEAR(swish_d2(z), (swish_d1(z + h) - swish_d1(z - h)) / (2 * h), 1e-8) << z;
  }
  EXPECT_DOUBLE_EQ(swish_d2(0.0), 0.5);
}

TEST(GradInputTest, LinearHead) {
  Layer layer{Eigen::RowVector2d(1.0, 2.0), Eigen::VectorXd::Constant(1, 0.5)};
  const MlpParams p({layer});
  const Eigen::VectorXd g = grad_input(p, Eigen::Vector2d(-4.0, 9.0));
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], 2.0);
}

TEST(GradInputTest, RejectsVectorOutput) {
  const MlpParams p = RandomNet({2, 3, 2}, 4);
  EXPECT_THROW(grad_input(p, Eigen::Vector2d(0, 0)), ConfigError);
}

TEST(GradInputTest, MatchesFiniteDifferences) {
  const MlpParams p = RandomNet({2, 16, 16, 1}, 6);
  const Eigen::Vector2d x(0.3, -0.7);
  const Eigen::VectorXd fd =
      fd_gradient([&](const Eigen::VectorXd& y) { return naive_energy(p, y); }, x, 1e-4);
  EXPECT_LE(max_relative_error(grad_input(p, x), fd), 1e-5);
}

TEST(HvpTest, OneUnitClosedForm) {
  // f(x) = a * swish(w.x + b) has Hessian a * swish''(z) w w^T.
  const Eigen::Vector2d w(0.8, -1.3);
  const double a = 1.7, b = 0.2;
  Layer hidden{w.transpose(), Eigen::VectorXd::Constant(1, b)};
  Layer head{Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Zero(1)};
  const MlpParams p({hidden, head});
  const Eigen::Vector2d x(0.4, 0.1);
  const double z = w.dot(x) + b;
  const Eigen::Matrix2d expected = a * swish_d2(z) * w * w.transpose();
  const Eigen::Vector2d v(1.5, -0.25);
  EXPECT_LE((hvp_input(p, x, v) - expected * v).norm(), 1e-15);
  EXPECT_LE((hessian_input(p, x).hessian - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(HvpTest, ZeroDirection) {
  const MlpParams p = RandomNet({2, 8, 1}, 7);
  EXPECT_TRUE(hvp_input(p, Eigen::Vector2d(0.3, 0.1), Eigen::Vector2d::Zero()).isZero(0.0));
}

TEST(HvpTest, MatchesFiniteDifferencesOfGradient) {
  const MlpParams p = RandomNet({2, 16, 16, 1}, 8);
  const Eigen::Vector2d x(-0.2, 0.6);
  const double h = 1e-4;
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector2d e = Eigen::Vector2d::Unit(i);
    const Eigen::VectorXd fd = (grad_input(p, x + h * e) - grad_input(p, x - h * e)) / (2 * h);
    EXPECT_LE(max_relative_error(hvp_input(p, x, e), fd), 1e-4);
  }
}

TEST(HvpTest, LinearInDirection) {
  const MlpParams p = RandomNet({3, 12, 12, 1}, 9);
  const Eigen::Vector3d x(0.1, -0.4, 0.9), u(1, 2, -1), v(-0.5, 0.3, 2);
  const double alpha = 1.25, beta = -0.75;
  const Eigen::VectorXd lhs = hvp_input(p, x, alpha * u + beta * v);
  const Eigen::VectorXd rhs = alpha * hvp_input(p, x, u) + beta * hvp_input(p, x, v);
  EXPECT_LE((lhs - rhs).norm(), 1e-12 * (1.0 + rhs.norm()));
}

TEST(HessianTest, SymmetricForEnergyNetwork) {
  const MlpParams p = RandomNet({2, 400, 400, 400, 1}, 10);
  const HessianResult h = hessian_input(p, Eigen::Vector2d(0.5, -0.5));
  EXPECT_LE(h.asymmetry, 1e-8);
  EXPECT_EQ(h.hessian, h.hessian.transpose());
}

TEST(JvpTest, MatchesFiniteDifferences) {
  const MlpParams p = RandomNet({2, 10, 2}, 11);
  const Eigen::Vector2d x(0.3, 0.3), v(0.6, -1.1);
  const double h = 1e-5;
  const Eigen::VectorXd fd =
      (naive_forward(p, x + h * v) - naive_forward(p, x - h * v)) / (2 * h);
  const Eigen::VectorXd jv = jvp_batch(p, Eigen::MatrixXd(x), Eigen::MatrixXd(v)).col(0);
  EXPECT_LE(max_relative_error(jv, fd), 1e-6);
}

TEST(DsmTermTest, HandDerivedLinearCase) {
  // f(x) = theta * x has s(xt) = -theta, like theta x^2/2 at xt = 1: with
  // x = 0, xt = 1, sigma = 1 the term is (1 - theta)^2 / 2.
  for (double theta : {-0.5, 0.0, 0.3, 2.0}) {
    Layer layer{Eigen::MatrixXd::Constant(1, 1, theta), Eigen::VectorXd::Zero(1)};
    const MlpParams p({layer});
    const LossAndGrad r = param_grad_of_dsm_term(p, Eigen::VectorXd::Zero(1),
                                                 Eigen::VectorXd::Ones(1), 1.0);
    EXPECT_DOUBLE_EQ(r.loss, 0.5 * (1 - theta) * (1 - theta));
    EXPECT_DOUBLE_EQ(r.grads.layers()[0].weight(0, 0), theta - 1.0);
    EXPECT_EQ(r.grads.layers()[0].bias[0], 0.0);
  }
}

TEST(DsmTermTest, StationaryLinearFitHasZeroGradient) {
  // For f(x) = w.x + b the batch loss is minimized by
  // w* = mean((xt - x) / sigma^2).
  Rng rng = make_stream(12, 0);
  const double sigma = 0.3;
  const int n = 50;
  Eigen::MatrixXd clean(2, n), noisy(2, n);
  for (int i = 0; i < n; ++i) {
    clean.col(i) = standard_normal(rng, 2);
    noisy.col(i) = clean.col(i) + sigma * standard_normal(rng, 2);
  }
  const Eigen::Vector2d w_star = ((noisy - clean) / (sigma * sigma)).rowwise().mean();
  Layer layer{w_star.transpose(), Eigen::VectorXd::Constant(1, 0.7)};
  const MlpParams p({layer});
  const LossAndGrad r = dsm_batch(p, clean, noisy, Eigen::VectorXd::Constant(n, sigma),
                                  Eigen::VectorXd::Ones(n));
  EXPECT_LE(r.grads.flatten().cwiseAbs().maxCoeff(), 1e-9);
}

TEST(DsmTermTest, ParameterGradientMatchesFiniteDifferences) {
  const MlpParams p = RandomNet({2, 6, 6, 1}, 13);
  const Eigen::Vector2d x(0.4, -0.2), xt(0.55, -0.05);
  const double sigma = 0.5;
  const LossAndGrad r = param_grad_of_dsm_term(p, x, xt, sigma);
  const Eigen::VectorXd flat = p.flatten();
  const Eigen::VectorXd analytic = r.grads.flatten();
  EXPECT_LE(relative_error(r.loss, DsmTermAt(p, flat, x, xt, sigma)), 1e-6);
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    Eigen::VectorXd fp = flat, fm = flat;
    fp[k] += h;
    fm[k] -= h;
    MlpParams pp = p, pm = p;
    pp.assign(fp);
    pm.assign(fm);
    const double fd = (param_grad_of_dsm_term(pp, x, xt, sigma).loss -
                       param_grad_of_dsm_term(pm, x, xt, sigma).loss) /
                      (2 * h);
    EXPECT_LE(relative_error(analytic[k], fd), 1e-4) << "parameter " << k;
  }
}

TEST(DsmTermTest, BatchEqualsSumOfTerms) {
  const MlpParams p = RandomNet({2, 5, 1}, 14);
  Rng rng = make_stream(14, 1);
  Eigen::MatrixXd clean(2, 4), noisy(2, 4);
  for (int i = 0; i < 4; ++i) {
    clean.col(i) = standard_normal(rng, 2);
    noisy.col(i) = clean.col(i) + 0.2 * standard_normal(rng, 2);
  }
  const LossAndGrad batch = dsm_batch(p, clean, noisy, Eigen::VectorXd::Constant(4, 0.2),
                                      Eigen::VectorXd::Ones(4));
  double loss = 0.0;
  Eigen::VectorXd grads = Eigen::VectorXd::Zero(p.num_parameters());
  for (int i = 0; i < 4; ++i) {
    const LossAndGrad t = param_grad_of_dsm_term(p, clean.col(i), noisy.col(i), 0.2);
    loss += t.loss;
    grads += t.grads.flatten();
  }
  EXPECT_NEAR(batch.loss, loss, 1e-12 * std::abs(loss));
  EXPECT_LE((batch.grads.flatten() - grads).norm(), 1e-12 * (1.0 + grads.norm()));
}

TEST(ScoreNetDsmTest, GradientMatchesFiniteDifferences) {
  const MlpParams p = RandomNet({2, 6, 2}, 15);
  Eigen::MatrixXd clean(2, 2), noisy(2, 2);
  clean << 0.1, -0.3, 0.5, 0.2;
  noisy << 0.2, -0.1, 0.4, 0.6;
  const Eigen::VectorXd sig = Eigen::VectorXd::Constant(2, 0.4), w = Eigen::VectorXd::Ones(2);
  const Eigen::VectorXd analytic = dsm_batch_score_net(p, clean, noisy, sig, w).grads.flatten();
  const Eigen::VectorXd flat = p.flatten();
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    Eigen::VectorXd fp = flat, fm = flat;
    fp[k] += 1e-5;
    fm[k] -= 1e-5;
    MlpParams pp = p, pm = p;
    pp.assign(fp);
    pm.assign(fm);
    const double fd = (dsm_batch_score_net(pp, clean, noisy, sig, w).loss -
                       dsm_batch_score_net(pm, clean, noisy, sig, w).loss) /
                      2e-5;
    EXPECT_LE(relative_error(analytic[k], fd), 1e-4) << k;
  }
}

TEST(GaussianNllTest, PerfectMeanUnitStd) {
  // Constant network: output = bias.
  Layer layer{Eigen::MatrixXd::Zero(4, 2), Eigen::Vector4d(0.3, -1.2, 0.0, 0.0)};
  const MlpParams p({layer});
  const LossAndGrad r = param_grad_of_gaussian_nll(p, Eigen::Vector2d(0.3, -1.2),
                                                   Eigen::Vector2d(5.0, 5.0));
  EXPECT_NEAR(r.loss, std::log(2.0 * std::numbers::pi), 1e-15);
}

TEST(GaussianNllTest, UnitGaussianArithmetic) {
  const MlpParams p = MlpParams::Zeros(std::vector<int>{2, 4});
  const LossAndGrad r = param_grad_of_gaussian_nll(p, Eigen::Vector2d(1.0, 0.0),
                                                   Eigen::Vector2d(0.0, 0.0));
  EXPECT_NEAR(r.loss, std::log(2.0 * std::numbers::pi) + 0.5, 1e-15);
}

TEST(GaussianNllTest, GradientMatchesFiniteDifferences) {
  const MlpParams p = RandomNet({2, 7, 7, 4}, 16);
  const Eigen::Vector2d x(0.9, -0.4), xt(1.1, -0.2);
  const Eigen::VectorXd analytic = param_grad_of_gaussian_nll(p, x, xt).grads.flatten();
  const Eigen::VectorXd flat = p.flatten();
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    Eigen::VectorXd fp = flat, fm = flat;
    fp[k] += 1e-5;
    fm[k] -= 1e-5;
    MlpParams pp = p, pm = p;
    pp.assign(fp);
    pm.assign(fm);
    const double fd = (param_grad_of_gaussian_nll(pp, x, xt).loss -
                       param_grad_of_gaussian_nll(pm, x, xt).loss) /
                      2e-5;
    EXPECT_LE(relative_error(analytic[k], fd), 1e-4) << k;
  }
}

TEST(DeterminismTest, RepeatedCallsAreBitIdentical) {
  const MlpParams p = RandomNet({2, 32, 32, 1}, 17);
  const Eigen::Vector2d x(0.12, 0.34), xt(0.2, 0.3), v(1.0, -1.0);
  EXPECT_EQ(grad_input(p, x), grad_input(p, x));
  EXPECT_EQ(hvp_input(p, x, v), hvp_input(p, x, v));
  EXPECT_EQ(param_grad_of_dsm_term(p, x, xt, 0.2).grads.flatten(),
            param_grad_of_dsm_term(p, x, xt, 0.2).grads.flatten());
}

}  // namespace
}  // namespace dsmgibbs::numgrad
