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

#ifndef DSMGIBBS_NUMGRAD_H_
#define DSMGIBBS_NUMGRAD_H_

// Differentiation engine for fixed-shape affine + Swish networks.
//
// The network is a_0 = x, z_l = W_l a_{l-1} + b_l, a_l = swish(z_l) on hidden
// layers and a_L = z_L on the output layer. Every routine has an explicit
// recursion (forward, reverse, forward-over-reverse and reverse-over-tangent)
// rather than a general tape.
//
// Batched entry points take matrices whose columns are independent samples;
// per-sample results are stacked the same way and parameter gradients are
// summed over columns.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dsmgibbs/random.h"

namespace dsmgibbs::numgrad {

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

class MlpParams {
 public:
  MlpParams() = default;
  // Throws ConfigError unless adjacent shapes chain and entries are finite.
  explicit MlpParams(std::vector<Layer> layers);

  // widths = {in, hidden..., out}.
  static MlpParams Zeros(std::span<const int> widths);
  // Weights ~ N(0, 1/fan_in), biases 0.
  static MlpParams Random(std::span<const int> widths, Rng& rng);

  int in_dim() const;
  int out_dim() const;
  std::vector<int> widths() const;
  bool empty() const { return layers_.empty(); }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  // Layer by layer: weight row-major, then bias.
  Eigen::Index num_parameters() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  MlpParams zeros_like() const;
  void add_scaled(const MlpParams& other, double scale);
  void scale(double factor);

 private:
  std::vector<Layer> layers_;
};

// Cached pre-activations z_1..z_L and activations a_0..a_L of one forward
// pass. When a tangent was pushed alongside, `tangent_pre` holds the
// directional derivatives of z_1..z_L.
struct DualTrace {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> post;
  std::vector<Eigen::MatrixXd> tangent_pre;
  // swish' and swish'' at each hidden pre-activation.
  std::vector<Eigen::MatrixXd> d1;
  std::vector<Eigen::MatrixXd> d2;

  bool has_tangent() const { return !tangent_pre.empty(); }
};

struct ForwardResult {
  Eigen::VectorXd value;
  DualTrace trace;
};

double swish(double z);
double swish_d1(double z);
double swish_d2(double z);

ForwardResult forward(const MlpParams& params, const Eigen::VectorXd& x);
Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs,
                              DualTrace* trace = nullptr);
// Forward pass carrying a tangent channel; returns the output tangent J v.
Eigen::MatrixXd jvp_batch(const MlpParams& params, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& directions, DualTrace* trace = nullptr);

// Gradient of a scalar-output network with respect to its input.
Eigen::VectorXd grad_input(const MlpParams& params, const Eigen::VectorXd& x);
Eigen::MatrixXd grad_input_batch(const MlpParams& params, const Eigen::MatrixXd& inputs);

// Exact (forward-over-reverse) Hessian-vector product of a scalar network.
Eigen::VectorXd hvp_input(const MlpParams& params, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& v);
Eigen::MatrixXd hvp_input_batch(const MlpParams& params, const Eigen::MatrixXd& inputs,
                                const Eigen::MatrixXd& directions);

struct HessianResult {
  Eigen::MatrixXd hessian;  // symmetrized
  double asymmetry = 0.0;   // max |H - H^T| before symmetrization
};
HessianResult hessian_input(const MlpParams& params, const Eigen::VectorXd& x);

struct LossAndGrad {
  double loss = 0.0;
  MlpParams grads;
};

// Backpropagates an output adjoint through a cached trace, giving the
// parameter gradient of sum_i <adjoint_i, out_i>.
MlpParams backward_params(const MlpParams& params, const DualTrace& trace,
                          const Eigen::MatrixXd& output_adjoint);

// Parameter gradient of D = sum_i <u_i, grad_x f(x_i)>: differentiates through
// an input gradient. `loss` carries D.
LossAndGrad param_grad_of_directional(const MlpParams& params, const Eigen::MatrixXd& inputs,
                                      const Eigen::MatrixXd& directions);

// Per-sample denoising score matching term 0.5 * |(xt - x)/sigma^2 + s(xt)|^2
// with s = -grad_x f, and its parameter gradient.
LossAndGrad param_grad_of_dsm_term(const MlpParams& params, const Eigen::VectorXd& clean,
                                   const Eigen::VectorXd& noisy, double sigma);

// Batched, weighted, optionally sigma-conditioned form. `inputs` holds the
// network inputs (noisy points, possibly with extra conditioning rows); only
// the first `clean.rows()` input coordinates enter the score. Column i has
// noise std sigmas[i] and weight weights[i]. Returns the weighted sum.
LossAndGrad dsm_batch(const MlpParams& params, const Eigen::MatrixXd& clean,
                      const Eigen::MatrixXd& inputs, const Eigen::VectorXd& sigmas,
                      const Eigen::VectorXd& weights);

// Same objective for a network that outputs the score directly (out_dim = d).
LossAndGrad dsm_batch_score_net(const MlpParams& params, const Eigen::MatrixXd& clean,
                                const Eigen::MatrixXd& inputs, const Eigen::VectorXd& sigmas,
                                const Eigen::VectorXd& weights);

// Diagonal Gaussian negative log-likelihood -log N(x; m, diag(exp(2 s)))
// for a network emitting (m, s) = (mean, log-std), out_dim = 2d.
LossAndGrad param_grad_of_gaussian_nll(const MlpParams& params, const Eigen::VectorXd& clean,
                                       const Eigen::VectorXd& noisy);
LossAndGrad gaussian_nll_batch(const MlpParams& params, const Eigen::MatrixXd& clean,
                               const Eigen::MatrixXd& noisy);

}  // namespace dsmgibbs::numgrad

#endif  // DSMGIBBS_NUMGRAD_H_
