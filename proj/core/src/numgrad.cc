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
#include <string>

#include "dsmgibbs/errors.h"

namespace dsmgibbs::numgrad {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_input(const MlpParams& params, Eigen::Index rows) {
  if (params.empty()) throw ConfigError("network has no layers");
  if (rows != params.in_dim()) {
    throw ConfigError("input dimension " + std::to_string(rows) + " does not match network input " +
                      std::to_string(params.in_dim()));
  }
}

void require_scalar(const MlpParams& params) {
  if (params.out_dim() != 1) {
    throw ConfigError("operation needs a scalar-output network, got out_dim " +
                      std::to_string(params.out_dim()));
  }
}

// Pushes `directions` through the cached forward pass: returns tangents of
// z_1..z_L.
std::vector<Eigen::MatrixXd> push_tangent(const MlpParams& params, const DualTrace& trace,
                                          const Eigen::MatrixXd& directions) {
  const auto& layers = params.layers();
  const std::size_t depth = layers.size();
  std::vector<Eigen::MatrixXd> tangent(depth);
  Eigen::MatrixXd act_dot = directions;
  for (std::size_t l = 0; l < depth; ++l) {
    tangent[l].noalias() = layers[l].weight * act_dot;
    if (l + 1 < depth) act_dot = trace.d1[l].cwiseProduct(tangent[l]);
  }
  return tangent;
}

// Reverse sweep for a scalar head seeded with ones. Returns dF/da_0.
Eigen::MatrixXd reverse_input(const MlpParams& params, const DualTrace& trace) {
  const auto& layers = params.layers();
  const Eigen::Index batch = trace.post.front().cols();
  Eigen::MatrixXd adj_pre = Eigen::MatrixXd::Ones(1, batch);
  Eigen::MatrixXd adj_act;
  for (std::size_t l = layers.size(); l-- > 0;) {
    adj_act.noalias() = layers[l].weight.transpose() * adj_pre;
    if (l > 0) adj_pre = adj_act.cwiseProduct(trace.d1[l - 1]);
  }
  return adj_act;
}

// Forward-over-reverse: tangent of the reverse sweep given tangents of z.
Eigen::MatrixXd reverse_tangent(const MlpParams& params, const DualTrace& trace,
                                const std::vector<Eigen::MatrixXd>& tangent) {
  const auto& layers = params.layers();
  const std::size_t depth = layers.size();
  const Eigen::Index batch = trace.post.front().cols();
  Eigen::MatrixXd adj_pre = Eigen::MatrixXd::Ones(1, batch);
  Eigen::MatrixXd adj_pre_dot;  // zero at the output layer
  Eigen::MatrixXd adj_act, adj_act_dot;
  for (std::size_t l = depth; l-- > 0;) {
    const Eigen::MatrixXd& w = layers[l].weight;
    adj_act.noalias() = w.transpose() * adj_pre;
    if (l + 1 == depth) {
      adj_act_dot = Eigen::MatrixXd::Zero(w.cols(), batch);
    } else {
      adj_act_dot.noalias() = w.transpose() * adj_pre_dot;
    }
    if (l > 0) {
      const Eigen::MatrixXd& d1 = trace.d1[l - 1];
      adj_pre = adj_act.cwiseProduct(d1);
      adj_pre_dot = adj_act_dot.cwiseProduct(d1) +
                    adj_act.cwiseProduct(trace.d2[l - 1]).cwiseProduct(tangent[l - 1]);
    }
  }
  return adj_act_dot;
}

LossAndGrad directional_from_trace(const MlpParams& params, const DualTrace& trace,
                                   const Eigen::MatrixXd& directions) {
  const auto& layers = params.layers();
  const std::size_t depth = layers.size();
  const Eigen::Index batch = directions.cols();
  const std::vector<Eigen::MatrixXd> tangent = push_tangent(params, trace, directions);

  LossAndGrad out;
  out.loss = tangent.back().sum();
  out.grads = params.zeros_like();
  auto& grads = out.grads.mutable_layers();

  // Adjoints of z_l and of its tangent. D = sum(tangent_L), so the output
  // layer seeds only the tangent adjoint.
  Eigen::MatrixXd adj_pre;
  Eigen::MatrixXd adj_tan = Eigen::MatrixXd::Ones(1, batch);
  Eigen::MatrixXd adj_act, adj_act_tan;
  for (std::size_t l = depth; l-- > 0;) {
    const Eigen::MatrixXd& w = layers[l].weight;
    const bool output_layer = (l + 1 == depth);
    Eigen::MatrixXd act_tan;
    if (l == 0) {
      act_tan = directions;
    } else {
      act_tan = trace.d1[l - 1].cwiseProduct(tangent[l - 1]);
    }
    grads[l].weight.noalias() += adj_tan * act_tan.transpose();
    if (!output_layer) {
      grads[l].weight.noalias() += adj_pre * trace.post[l].transpose();
      grads[l].bias += adj_pre.rowwise().sum();
    }
    if (l == 0) break;
    adj_act_tan.noalias() = w.transpose() * adj_tan;
    const Eigen::MatrixXd& d1 = trace.d1[l - 1];
    Eigen::MatrixXd next_pre = adj_act_tan.cwiseProduct(trace.d2[l - 1]).cwiseProduct(tangent[l - 1]);
    if (!output_layer) {
      adj_act.noalias() = w.transpose() * adj_pre;
      next_pre += adj_act.cwiseProduct(d1);
    }
    adj_pre = std::move(next_pre);
    adj_tan = adj_act_tan.cwiseProduct(d1);
  }
  return out;
}

Eigen::MatrixXd column(const Eigen::VectorXd& v) { return Eigen::MatrixXd(v); }

}  // namespace

double swish(double z) { return z * sigmoid(z); }

double swish_d1(double z) {
  const double s = sigmoid(z);
  return s + z * s * (1.0 - s);
}

double swish_d2(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s) * (2.0 + z * (1.0 - 2.0 * s));
}

MlpParams::MlpParams(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weight.rows() != layer.bias.size() || layer.weight.rows() == 0 ||
        layer.weight.cols() == 0) {
      throw ConfigError("layer " + std::to_string(l) + " has inconsistent weight/bias shapes");
    }
    if (l > 0 && layers_[l - 1].weight.rows() != layer.weight.cols()) {
      throw ConfigError("layer " + std::to_string(l) + " does not chain with its predecessor");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw ConfigError("layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
}

MlpParams MlpParams::Zeros(std::span<const int> widths) {
  if (widths.size() < 2) throw ConfigError("network needs at least input and output widths");
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] <= 0 || widths[l + 1] <= 0) throw ConfigError("layer widths must be positive");
    layers.push_back({Eigen::MatrixXd::Zero(widths[l + 1], widths[l]),
                      Eigen::VectorXd::Zero(widths[l + 1])});
  }
  return MlpParams(std::move(layers));
}

MlpParams MlpParams::Random(std::span<const int> widths, Rng& rng) {
  MlpParams params = Zeros(widths);
  for (Layer& layer : params.layers_) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(layer.weight.cols())));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = normal(rng);
    }
  }
  return params;
}

int MlpParams::in_dim() const { return layers_.empty() ? 0 : int(layers_.front().weight.cols()); }
int MlpParams::out_dim() const { return layers_.empty() ? 0 : int(layers_.back().weight.rows()); }

std::vector<int> MlpParams::widths() const {
  std::vector<int> w;
  if (layers_.empty()) return w;
  w.push_back(in_dim());
  for (const Layer& layer : layers_) w.push_back(int(layer.weight.rows()));
  return w;
}

Eigen::Index MlpParams::num_parameters() const {
  Eigen::Index n = 0;
  for (const Layer& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

Eigen::VectorXd MlpParams::flatten() const {
  Eigen::VectorXd flat(num_parameters());
  Eigen::Index k = 0;
  for (const Layer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat[k++] = layer.weight(r, c);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat[k++] = layer.bias[r];
  }
  return flat;
}

void MlpParams::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != num_parameters()) throw ConfigError("flat parameter vector has wrong length");
  Eigen::Index k = 0;
  for (Layer& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = flat[k++];
  }
}

MlpParams MlpParams::zeros_like() const {
  MlpParams out = *this;
  for (Layer& layer : out.layers_) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  return out;
}

void MlpParams::add_scaled(const MlpParams& other, double scale) {
  if (other.layers_.size() != layers_.size()) throw ConfigError("parameter shapes differ");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weight += scale * other.layers_[l].weight;
    layers_[l].bias += scale * other.layers_[l].bias;
  }
}

void MlpParams::scale(double factor) {
  for (Layer& layer : layers_) {
    layer.weight *= factor;
    layer.bias *= factor;
  }
}

Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs,
                              DualTrace* trace) {
  check_input(params, inputs.rows());
  const auto& layers = params.layers();
  if (trace != nullptr) {
    trace->pre.assign(layers.size(), {});
    trace->post.assign(layers.size() + 1, {});
    trace->tangent_pre.clear();
    trace->d1.assign(layers.size(), {});
    trace->d2.assign(layers.size(), {});
    trace->post[0] = inputs;
  }
  Eigen::MatrixXd act = inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd pre = layers[l].weight * act;
    pre.colwise() += layers[l].bias;
    if (l + 1 < layers.size()) {
      // exp(-z) may overflow to inf for very negative z; 1/(1+inf) is still 0.
      const auto z = pre.array();
      const Eigen::ArrayXXd sig = (1.0 + (-z).exp()).inverse();
      act = (z * sig).matrix();
      if (trace != nullptr) {
        const Eigen::ArrayXXd slope = sig * (1.0 - sig);
        trace->d1[l] = (sig + z * slope).matrix();
        trace->d2[l] = (slope * (2.0 + z * (1.0 - 2.0 * sig))).matrix();
      }
    } else {
      act = pre;
    }
    if (trace != nullptr) {
      trace->pre[l] = std::move(pre);
      trace->post[l + 1] = act;
    }
  }
  return act;
}

ForwardResult forward(const MlpParams& params, const Eigen::VectorXd& x) {
  ForwardResult result;
  result.value = forward_batch(params, column(x), &result.trace).col(0);
  return result;
}

Eigen::MatrixXd jvp_batch(const MlpParams& params, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& directions, DualTrace* trace) {
  if (directions.rows() != inputs.rows() || directions.cols() != inputs.cols()) {
    throw ConfigError("tangent shape does not match inputs");
  }
  DualTrace local;
  DualTrace& t = trace != nullptr ? *trace : local;
  forward_batch(params, inputs, &t);
  t.tangent_pre = push_tangent(params, t, directions);
  return t.tangent_pre.back();
}

Eigen::MatrixXd grad_input_batch(const MlpParams& params, const Eigen::MatrixXd& inputs) {
  require_scalar(params);
  DualTrace trace;
  forward_batch(params, inputs, &trace);
  return reverse_input(params, trace);
}

Eigen::VectorXd grad_input(const MlpParams& params, const Eigen::VectorXd& x) {
  return grad_input_batch(params, column(x)).col(0);
}

Eigen::MatrixXd hvp_input_batch(const MlpParams& params, const Eigen::MatrixXd& inputs,
                                const Eigen::MatrixXd& directions) {
  require_scalar(params);
  if (directions.rows() != inputs.rows() || directions.cols() != inputs.cols()) {
    throw ConfigError("direction shape does not match inputs");
  }
  DualTrace trace;
  forward_batch(params, inputs, &trace);
  const std::vector<Eigen::MatrixXd> tangent = push_tangent(params, trace, directions);
  return reverse_tangent(params, trace, tangent);
}

Eigen::VectorXd hvp_input(const MlpParams& params, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& v) {
  return hvp_input_batch(params, column(x), column(v)).col(0);
}

HessianResult hessian_input(const MlpParams& params, const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  const Eigen::MatrixXd inputs = x.replicate(1, d);
  HessianResult result;
  const Eigen::MatrixXd raw =
      hvp_input_batch(params, inputs, Eigen::MatrixXd::Identity(d, d));
  result.asymmetry = d == 0 ? 0.0 : (raw - raw.transpose()).cwiseAbs().maxCoeff();
  result.hessian = 0.5 * (raw + raw.transpose());
  return result;
}

MlpParams backward_params(const MlpParams& params, const DualTrace& trace,
                          const Eigen::MatrixXd& output_adjoint) {
  const auto& layers = params.layers();
  if (trace.pre.size() != layers.size()) throw ConfigError("trace does not match network depth");
  if (output_adjoint.rows() != params.out_dim() ||
      output_adjoint.cols() != trace.post.front().cols()) {
    throw ConfigError("output adjoint shape does not match trace");
  }
  MlpParams grads = params.zeros_like();
  auto& g = grads.mutable_layers();
  Eigen::MatrixXd adj_pre = output_adjoint;
  for (std::size_t l = layers.size(); l-- > 0;) {
    g[l].weight.noalias() = adj_pre * trace.post[l].transpose();
    g[l].bias = adj_pre.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd adj_act = layers[l].weight.transpose() * adj_pre;
    adj_pre = adj_act.cwiseProduct(trace.d1[l - 1]);
  }
  return grads;
}

LossAndGrad param_grad_of_directional(const MlpParams& params, const Eigen::MatrixXd& inputs,
                                      const Eigen::MatrixXd& directions) {
  require_scalar(params);
  if (directions.rows() != inputs.rows() || directions.cols() != inputs.cols()) {
    throw ConfigError("direction shape does not match inputs");
  }
  DualTrace trace;
  forward_batch(params, inputs, &trace);
  return directional_from_trace(params, trace, directions);
}

LossAndGrad dsm_batch(const MlpParams& params, const Eigen::MatrixXd& clean,
                      const Eigen::MatrixXd& inputs, const Eigen::VectorXd& sigmas,
                      const Eigen::VectorXd& weights) {
  require_scalar(params);
  const Eigen::Index d = clean.rows();
  const Eigen::Index batch = clean.cols();
  if (inputs.cols() != batch || inputs.rows() < d || sigmas.size() != batch ||
      weights.size() != batch) {
    throw ConfigError("inconsistent denoising score matching batch shapes");
  }
  DualTrace trace;
  forward_batch(params, inputs, &trace);
  const Eigen::MatrixXd grad = reverse_input(params, trace);

  // r_i = (xt_i - x_i)/sigma_i^2 - grad_x f(xt_i); loss = sum w_i/2 |r_i|^2.
  Eigen::MatrixXd residual = inputs.topRows(d) - clean;
  for (Eigen::Index i = 0; i < batch; ++i) residual.col(i) /= sigmas[i] * sigmas[i];
  residual -= grad.topRows(d);

  Eigen::MatrixXd directions = Eigen::MatrixXd::Zero(inputs.rows(), batch);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    loss += 0.5 * weights[i] * residual.col(i).squaredNorm();
    directions.col(i).head(d) = weights[i] * residual.col(i);
  }
  // d loss / d theta = sum w r . d s/d theta = -d/d theta sum <w r, grad_x f>.
  LossAndGrad out = directional_from_trace(params, trace, directions);
  out.grads.scale(-1.0);
  out.loss = loss;
  return out;
}

LossAndGrad param_grad_of_dsm_term(const MlpParams& params, const Eigen::VectorXd& clean,
                                   const Eigen::VectorXd& noisy, double sigma) {
  return dsm_batch(params, column(clean), column(noisy), Eigen::VectorXd::Constant(1, sigma),
                   Eigen::VectorXd::Ones(1));
}

LossAndGrad dsm_batch_score_net(const MlpParams& params, const Eigen::MatrixXd& clean,
                                const Eigen::MatrixXd& inputs, const Eigen::VectorXd& sigmas,
                                const Eigen::VectorXd& weights) {
  const Eigen::Index d = clean.rows();
  const Eigen::Index batch = clean.cols();
  if (params.out_dim() != d) throw ConfigError("score network output must match data dimension");
  if (inputs.cols() != batch || inputs.rows() < d || sigmas.size() != batch ||
      weights.size() != batch) {
    throw ConfigError("inconsistent denoising score matching batch shapes");
  }
  DualTrace trace;
  const Eigen::MatrixXd score = forward_batch(params, inputs, &trace);
  Eigen::MatrixXd residual = inputs.topRows(d) - clean;
  for (Eigen::Index i = 0; i < batch; ++i) residual.col(i) /= sigmas[i] * sigmas[i];
  residual += score;
  LossAndGrad out;
  for (Eigen::Index i = 0; i < batch; ++i) {
    out.loss += 0.5 * weights[i] * residual.col(i).squaredNorm();
    residual.col(i) *= weights[i];
  }
  out.grads = backward_params(params, trace, residual);
  return out;
}

LossAndGrad gaussian_nll_batch(const MlpParams& params, const Eigen::MatrixXd& clean,
                               const Eigen::MatrixXd& noisy) {
  const Eigen::Index d = clean.rows();
  if (params.out_dim() != 2 * d) {
    throw ConfigError("posterior network must emit 2d outputs (mean, log-std)");
  }
  if (noisy.cols() != clean.cols()) throw ConfigError("clean/noisy batch sizes differ");
  DualTrace trace;
  const Eigen::MatrixXd out = forward_batch(params, noisy, &trace);
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  Eigen::MatrixXd adjoint(2 * d, clean.cols());
  LossAndGrad result;
  for (Eigen::Index i = 0; i < clean.cols(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double mean = out(k, i);
      const double log_std = out(d + k, i);
      const double diff = clean(k, i) - mean;
      const double inv_var = std::exp(-2.0 * log_std);
      result.loss += log_std + half_log_2pi + 0.5 * diff * diff * inv_var;
      adjoint(k, i) = -diff * inv_var;
      adjoint(d + k, i) = 1.0 - diff * diff * inv_var;
    }
  }
  result.grads = backward_params(params, trace, adjoint);
  return result;
}

LossAndGrad param_grad_of_gaussian_nll(const MlpParams& params, const Eigen::VectorXd& clean,
                                       const Eigen::VectorXd& noisy) {
  return gaussian_nll_batch(params, column(clean), column(noisy));
}

}  // namespace dsmgibbs::numgrad
