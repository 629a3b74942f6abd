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

class Environment;

/// Simulates controls from x0 through the environment dynamics and fills in the
/// trajectory cost. Throws DivergenceError on the first non-finite state.
Trajectory rollout(const Environment& env, const ProblemInstance& instance,
                   const ControlSequence& controls);

/// Same as above but starting from an explicit state (instance supplies the cost
/// parameters only).
Trajectory rollout_from(const Environment& env, const State& x0, const ProblemInstance& instance,
                        const ControlSequence& controls);

/// Sum of stage costs over t = 0..H-1 plus the terminal cost. Accumulated in
/// double precision in index order.
double trajectory_cost(const Environment& env, const Matrix& states, const Matrix& controls,
                       const ProblemInstance& instance);

/// Rollout cost, or +infinity if the rollout diverges.
double rollout_cost_or_inf(const Environment& env, const ProblemInstance& instance,
                           const ControlSequence& controls);

/// Shift-by-one with a single zero pad: [u1, ..., u_{H-1}, 0].
ControlSequence warm_start_shift(const ControlSequence& previous);

}  // namespace miso
