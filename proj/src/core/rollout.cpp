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

#include "miso/core/rollout.hpp"

#include <limits>

#include "miso/core/error.hpp"
#include "miso/envs/environment.hpp"

namespace miso {

Trajectory rollout_from(const Environment& env, const State& x0, const ProblemInstance& instance,
                        const ControlSequence& controls) {
  const int H = controls.horizon();
  const int n = env.state_dim();
  if (x0.size() != n || controls.dim() != env.control_dim())
    throw DimensionError("rollout: x0 or controls do not match environment dimensions");
  Trajectory traj;
  traj.states.resize(H + 1, n);
  traj.controls = controls.controls;
  traj.states.row(0) = x0.transpose();
  State x = x0;
  for (int t = 0; t < H; ++t) {
    if (!controls.controls.row(t).allFinite()) throw DivergenceError(static_cast<std::size_t>(t));
    x = env.step(x, controls.at(t));
    if (!x.allFinite()) throw DivergenceError(static_cast<std::size_t>(t + 1));
    traj.states.row(t + 1) = x.transpose();
  }
  traj.cost = trajectory_cost(env, traj.states, traj.controls, instance);
  return traj;
}

Trajectory rollout(const Environment& env, const ProblemInstance& instance, const ControlSequence& controls) {
  return rollout_from(env, instance.x0, instance, controls);
}

double trajectory_cost(const Environment& env, const Matrix& states, const Matrix& controls,
                       const ProblemInstance& instance) {
  const Eigen::Index H = controls.rows();
  if (states.rows() != H + 1 || states.cols() != env.state_dim() || controls.cols() != env.control_dim())
    throw DimensionError("trajectory_cost: shape mismatch");
  double total = 0.0;
  for (Eigen::Index t = 0; t < H; ++t)
    total += env.stage_cost(static_cast<int>(t), states.row(t).transpose(), controls.row(t).transpose(), instance);
  total += env.terminal_cost(states.row(H).transpose(), instance);
  return total;
}

double rollout_cost_or_inf(const Environment& env, const ProblemInstance& instance,
                           const ControlSequence& controls) {
  try {
    const double c = rollout(env, instance, controls).cost;
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

ControlSequence warm_start_shift(const ControlSequence& previous) {
  const Eigen::Index H = previous.controls.rows();
  Matrix out = Matrix::Zero(H, previous.controls.cols());
  if (H > 1) out.topRows(H - 1) = previous.controls.bottomRows(H - 1);
  return ControlSequence(std::move(out));
}

}  // namespace miso
