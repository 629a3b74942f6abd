/*
 Copyright 2026 The MISO Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "miso/net/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"

namespace miso {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Vector flatten(const ControlSequence& u) {
  Vector out(u.controls.size());
  const int m = u.dim();
  for (int t = 0; t < u.horizon(); ++t)
    for (int j = 0; j < m; ++j) out[t * m + j] = u.controls(t, j);
  return out;
}

ControlSequence unflatten(const Eigen::Ref<const Vector>& flat, int horizon, int control_dim) {
  if (flat.size() != static_cast<Eigen::Index>(horizon) * control_dim) throw DimensionError("unflatten: size mismatch");
  Matrix u(horizon, control_dim);
  for (int t = 0; t < horizon; ++t)
    for (int j = 0; j < control_dim; ++j) u(t, j) = flat[t * control_dim + j];
  return ControlSequence(std::move(u));
}

void ModelParams::validate() const {
  if (heads.empty()) throw Error("model needs at least one head");
  if (feature_dim < 1 || horizon < 1 || control_dim < 1) throw Error("model dimensions must be positive");
  if (in_mean.size() != feature_dim || in_std.size() != feature_dim) throw Error("input standardization size mismatch");
  if (out_mean.size() != output_dim() || out_std.size() != output_dim() || out_scale.size() != output_dim())
    throw Error("output standardization size mismatch");
  if ((in_std.array() <= 0.0).any() || (out_std.array() <= 0.0).any())
    throw Error("standardization std must be strictly positive");
  if (u_min.size() != control_dim || u_max.size() != control_dim) throw Error("bounds size mismatch");
  if (trunk.empty() || trunk.front().in != feature_dim) throw Error("trunk input does not match feature_dim");
  for (const auto& h : heads)
    if (h.out != output_dim() || h.in != trunk.back().out) throw Error("head shape mismatch");
  if (!theta.allFinite()) throw Error("non-finite model parameters");
}

namespace {

LayerSpec add_layer(int in, int out, Activation act, Eigen::Index& cursor) {
  LayerSpec l{in, out, act, cursor, cursor + static_cast<Eigen::Index>(in) * out};
  cursor = l.b_offset + out;
  return l;
}

void glorot(const LayerSpec& l, Vector& theta, Rng& rng) {
  const double a = std::sqrt(6.0 / (l.in + l.out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(l.in) * l.out; ++i) theta[l.w_offset + i] = dist(rng);
  // Nonzero biases keep heads apart when the standardized input is constant.
  std::uniform_real_distribution<double> bias(-1.0 / std::sqrt(l.in), 1.0 / std::sqrt(l.in));
  for (int i = 0; i < l.out; ++i) theta[l.b_offset + i] = bias(rng);
}

Eigen::Map<Matrix> weight_mut(Vector& theta, const LayerSpec& l) { return {theta.data() + l.w_offset, l.out, l.in}; }
Eigen::Map<Vector> bias_mut(Vector& theta, const LayerSpec& l) { return {theta.data() + l.b_offset, l.out}; }

void apply(Activation act, Matrix& z) {
  if (act == Activation::gelu) z = z.unaryExpr([](double v) { return gelu(v); });
}

}  // namespace

ModelParams make_model(const Architecture& arch, EnvId env, LossKind kind, const Vector& u_min, const Vector& u_max,
                       std::uint64_t seed) {
  if (arch.heads < 1) throw Error("K must be >= 1");
  ModelParams p;
  p.env_id = env;
  p.loss_kind = kind;
  p.feature_dim = arch.feature_dim;
  p.horizon = arch.horizon;
  p.control_dim = arch.control_dim;
  Eigen::Index cursor = 0;
  int width = arch.feature_dim;
  for (int h : arch.hidden) {
    p.trunk.push_back(add_layer(width, h, Activation::gelu, cursor));
    width = h;
  }
  p.trunk.push_back(add_layer(width, arch.embed, Activation::gelu, cursor));
  for (int k = 0; k < arch.heads; ++k)
    p.heads.push_back(add_layer(arch.embed, p.output_dim(), Activation::identity, cursor));
  p.theta = Vector::Zero(cursor);
  Rng rng = make_rng(seed);
  for (const auto& l : p.trunk) glorot(l, p.theta, rng);
  for (const auto& l : p.heads) glorot(l, p.theta, rng);
  p.in_mean = Vector::Zero(p.feature_dim);
  p.in_std = Vector::Ones(p.feature_dim);
  p.out_mean = Vector::Zero(p.output_dim());
  p.out_std = Vector::Ones(p.output_dim());
  p.out_scale = Vector::Ones(p.output_dim());
  p.u_min = u_min;
  p.u_max = u_max;
  p.validate();
  return p;
}

ModelParams truncate_heads(const ModelParams& params, int k) {
  if (k < 1 || k > params.K()) throw Error("truncate_heads: k out of range");
  ModelParams out = params;
  out.heads.resize(static_cast<std::size_t>(k));
  // Heads are laid out after the trunk and in order, so truncation drops a suffix.
  out.theta.conservativeResize(out.heads.back().b_offset + out.heads.back().out);
  return out;
}

std::vector<Matrix> forward_batch(const ModelParams& params, const Matrix& features, ForwardCache* cache) {
  if (features.rows() != params.feature_dim)
    throw DimensionError("forward: feature dimension " + std::to_string(features.rows()) + " != " +
                         std::to_string(params.feature_dim));
  if (!params.theta.allFinite()) throw Error("forward: non-finite parameters");
  const Eigen::Index B = features.cols();
  Matrix x = (features.colwise() - params.in_mean).array().colwise() / params.in_std.array();
  if (cache) {
    cache->batch = static_cast<int>(B);
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
    cache->unclamped.clear();
  }
  for (const auto& l : params.trunk) {
    Matrix z = params.weight(l) * x;
    z.colwise() += params.bias(l);
    if (cache) cache->pre.push_back(z);
    apply(l.act, z);
    if (cache) cache->post.push_back(z);
    x = std::move(z);
  }
  const Vector gain = params.out_scale.cwiseProduct(params.out_std);
  const Vector offset = params.out_scale.cwiseProduct(params.out_mean);
  const int m = params.control_dim;
  std::vector<Matrix> outputs;
  outputs.reserve(params.heads.size());
  for (const auto& h : params.heads) {
    Matrix y = params.weight(h) * x;
    y.colwise() += params.bias(h);
    y = (y.array().colwise() * gain.array()).colwise() + offset.array();
    if (cache) cache->unclamped.push_back(y);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const auto j = r % m;
      y.row(r) = y.row(r).cwiseMax(params.u_min[j]).cwiseMin(params.u_max[j]);
    }
    outputs.push_back(std::move(y));
  }
  return outputs;
}

CandidateSet forward(const ModelParams& params, const Vector& features) {
  const auto outs = forward_batch(params, features);
  CandidateSet set;
  for (std::size_t k = 0; k < outs.size(); ++k)
    set.push_back(unflatten(outs[k].col(0), params.horizon, params.control_dim), "head_" + std::to_string(k));
  return set;
}

Vector backward(const ModelParams& params, const ForwardCache& cache, const std::vector<Matrix>& upstream) {
  if (cache.batch == 0 || cache.post.size() != params.trunk.size() || cache.unclamped.size() != params.heads.size())
    throw Error("backward: missing forward cache");
  if (upstream.size() != params.heads.size()) throw DimensionError("backward: one upstream gradient per head required");
  Vector grad = Vector::Zero(params.theta.size());
  const Eigen::Index B = cache.batch;
  const Vector gain = params.out_scale.cwiseProduct(params.out_std);
  const int m = params.control_dim;
  const Matrix& embed = cache.post.back();
  Matrix d_embed = Matrix::Zero(embed.rows(), B);

  for (std::size_t k = 0; k < params.heads.size(); ++k) {
    const auto& h = params.heads[k];
    const Matrix& y = cache.unclamped[k];
    if (upstream[k].rows() != y.rows() || upstream[k].cols() != B)
      throw DimensionError("backward: upstream gradient shape mismatch");
    Matrix g = upstream[k];
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      const auto j = r % m;
      for (Eigen::Index c = 0; c < B; ++c) {
        const double v = y(r, c);
        if (!(v > params.u_min[j] && v < params.u_max[j])) g(r, c) = 0.0;
      }
    }
    g.array().colwise() *= gain.array();
    weight_mut(grad, h) = g * embed.transpose();
    bias_mut(grad, h) = g.rowwise().sum();
    d_embed.noalias() += params.weight(h).transpose() * g;
  }

  Matrix delta = std::move(d_embed);
  for (std::size_t i = params.trunk.size(); i-- > 0;) {
    const auto& l = params.trunk[i];
    if (l.act == Activation::gelu)
      delta.array() *= cache.pre[i].unaryExpr([](double v) { return gelu_derivative(v); }).array();
    const Matrix& input = i == 0 ? cache.input : cache.post[i - 1];
    weight_mut(grad, l) = delta * input.transpose();
    bias_mut(grad, l) = delta.rowwise().sum();
    if (i > 0) delta = params.weight(l).transpose() * delta;
  }
  return grad;
}

}  // namespace miso
