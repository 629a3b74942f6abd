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

#pragma once

#include <cstdint>
#include <vector>

#include "miso/core/types.hpp"

namespace miso {

enum class Activation : std::uint8_t { identity = 0, gelu = 1 };

/// Location of one dense layer inside the flat parameter vector. Weights are
/// stored column-major (out x in), followed by the bias.
struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation act = Activation::identity;
  Eigen::Index w_offset = 0;
  Eigen::Index b_offset = 0;
};

struct Architecture {
  int feature_dim = 0;
  std::vector<int> hidden = {256, 256};  // GELU layers
  int embed = 64;                        // GELU embedding shared by all heads
  int heads = 1;                         // K
  int horizon = 1;
  int control_dim = 1;
};

/// Shared trunk + K linear heads, each producing an H x m control sequence.
/// All trainable parameters live in `theta`; layers view into it.
struct ModelParams {
  EnvId env_id = EnvId::toy1d;
  LossKind loss_kind = LossKind::regression;
  int feature_dim = 0;
  int horizon = 0;
  int control_dim = 0;
  std::vector<LayerSpec> trunk;
  std::vector<LayerSpec> heads;
  Vector theta;
  Vector in_mean, in_std;    // feature_dim
  Vector out_mean, out_std;  // H*m, flattened t*m + j
  Vector out_scale;          // H*m
  Vector u_min, u_max;       // m

  int K() const { return static_cast<int>(heads.size()); }
  int output_dim() const { return horizon * control_dim; }
  Eigen::Index num_parameters() const { return theta.size(); }

  Eigen::Map<const Matrix> weight(const LayerSpec& l) const {
    return {theta.data() + l.w_offset, l.out, l.in};
  }
  Eigen::Map<const Vector> bias(const LayerSpec& l) const { return {theta.data() + l.b_offset, l.out}; }

  /// Throws Error if standardization or shapes are inconsistent.
  void validate() const;
};

/// Glorot-uniform weights, U(+-1/sqrt(fan_in)) biases, identity standardization.
ModelParams make_model(const Architecture& arch, EnvId env, LossKind kind, const Vector& u_min,
                       const Vector& u_max, std::uint64_t seed);

/// Copy keeping only the first `k` heads.
ModelParams truncate_heads(const ModelParams& params, int k);

/// Activations kept for the reverse pass.
struct ForwardCache {
  int batch = 0;
  Matrix input;                  // standardized features
  std::vector<Matrix> pre;       // trunk pre-activations
  std::vector<Matrix> post;      // trunk activations
  std::vector<Matrix> unclamped; // per head, scaled outputs before the clamp
};

/// Batched forward pass. `features` is feature_dim x B (one column per sample).
/// Returns K matrices of size (H*m) x B holding clamped controls.
std::vector<Matrix> forward_batch(const ModelParams& params, const Matrix& features, ForwardCache* cache = nullptr);

/// Single-sample forward; candidates labelled "head_<k>".
CandidateSet forward(const ModelParams& params, const Vector& features);

/// Reverse pass. `upstream[k]` is dLoss/dControls for head k, (H*m) x B. The
/// clamp passes gradient only where the unclamped output is strictly inside
/// the bounds. Returns the gradient w.r.t. theta.
Vector backward(const ModelParams& params, const ForwardCache& cache, const std::vector<Matrix>& upstream);

/// Flattened (t*m + j) view of a control sequence and back.
Vector flatten(const ControlSequence& u);
ControlSequence unflatten(const Eigen::Ref<const Vector>& flat, int horizon, int control_dim);

double gelu(double x);
double gelu_derivative(double x);

}  // namespace miso
