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

#include "miso/envs/environment.hpp"

namespace miso {

struct FeatureShape {
  int src_len = 0;  // steps
  int src_dim = 0;  // per-step width
  int size() const { return src_len * src_dim; }
};

/// Per-step layout:
///   toy1d    [target - x_{t+1}, u_t]                       5 x 2
///   cartpole [goal - x_{t+1}, u_t], last (zero-pad) step dropped  9 x 5
///   reacher  [goal - x_{t+1}, u_t, target_xy]              10 x 8
///   driving  [ref_t - x_{t+1}, u_t]                        40 x 7
FeatureShape feature_shape(const Environment& env);

/// Rolls out the warm start from psi.x0 and flattens the per-step rows.
/// Not standardized. Throws DivergenceError if the rollout diverges.
Vector featurize(const Environment& env, const ProblemInstance& psi, const ControlSequence& warm_start);

}  // namespace miso
