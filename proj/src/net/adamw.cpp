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

#include "miso/net/adamw.hpp"

#include <cmath>

#include "miso/core/error.hpp"

namespace miso {

double clip_grad_norm(Vector& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw Error("grad_norm_clip must be positive");
  const double norm = grads.norm();
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    grads *= scale;
    return scale;
  }
  return 1.0;
}

double adamw_step(Vector& theta, Vector grads, AdamWState& state, const AdamWConfig& cfg) {
  if (grads.size() != theta.size()) throw DimensionError("adamw_step: gradient size mismatch");
  if (state.m.size() != theta.size()) {
    state.m = Vector::Zero(theta.size());
    state.v = Vector::Zero(theta.size());
    state.step = 0;
  }
  const double norm = grads.norm();
  clip_grad_norm(grads, cfg.grad_norm_clip);
  ++state.step;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  theta *= (1.0 - cfg.lr * cfg.weight_decay);
  theta.array() -= cfg.lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + cfg.eps);
  return norm;
}

}  // namespace miso
