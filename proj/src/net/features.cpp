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

#include "miso/net/features.hpp"

#include "miso/core/error.hpp"
#include "miso/core/rollout.hpp"

namespace miso {

FeatureShape feature_shape(const Environment& env) {
  const int H = env.horizon();
  const int n = env.state_dim();
  const int m = env.control_dim();
  switch (env.id()) {
    case EnvId::toy1d: return {H, n + m};
    case EnvId::cartpole: return {std::max(1, H - 1), n + m};
    case EnvId::reacher: return {H, n + m + 2};
    case EnvId::driving: return {H, n + m};
  }
  throw Error("feature_shape: unknown environment");
}

Vector featurize(const Environment& env, const ProblemInstance& psi, const ControlSequence& warm_start) {
  const int H = env.horizon();
  if (warm_start.horizon() != H || warm_start.dim() != env.control_dim())
    throw DimensionError("featurize: warm start must be H x m");
  env.validate_instance(psi);
  const Trajectory traj = rollout(env, psi, warm_start);
  const FeatureShape shape = feature_shape(env);
  const int n = env.state_dim();
  const int m = env.control_dim();
  Vector f(shape.size());
  Eigen::Vector2d target_xy = Eigen::Vector2d::Zero();
  if (env.id() == EnvId::reacher) target_xy = env.reacher_fingertip((*psi.goal)[0], (*psi.goal)[1]);
  for (int t = 0; t < shape.src_len; ++t) {
    auto row = f.segment(static_cast<Eigen::Index>(t) * shape.src_dim, shape.src_dim);
    const Vector target =
        env.id() == EnvId::driving ? Vector(psi.reference->row(t).transpose()) : *psi.goal;
    row.head(n) = target - traj.states.row(t + 1).transpose();
    row.segment(n, m) = warm_start.controls.row(t).transpose();
    if (env.id() == EnvId::reacher) row.tail(2) = target_xy;
  }
  return f;
}

}  // namespace miso
