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

#include "miso/core/types.hpp"

namespace miso {

struct AdamWConfig {
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_norm_clip = 2.0;
};

struct AdamWState {
  Vector m;
  Vector v;
  long step = 0;
};

/// Scales `grads` in place so its global L2 norm is at most `max_norm`.
/// Returns the applied factor (1 when no clipping happened).
double clip_grad_norm(Vector& grads, double max_norm);

/// Clip, then one AdamW update with decoupled weight decay
/// (theta *= 1 - lr*wd before the Adam step). Returns the pre-clip norm.
double adamw_step(Vector& theta, Vector grads, AdamWState& state, const AdamWConfig& cfg);

}  // namespace miso
