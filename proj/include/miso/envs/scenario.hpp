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

#include <string>

#include "miso/envs/environment.hpp"

namespace miso {

enum class RouteKind { lane_keep, lane_change, arc, abrupt_switch };

/// One episode's worth of problem parameters. Goal-based environments keep a
/// fixed goal; driving slides an H-step window along a longer route.
struct Scenario {
  EnvId env_id = EnvId::toy1d;
  State x0;
  State goal;          // goal-based environments
  Matrix route;        // driving: (episode_length + H + 1) x n, row k = reference at time k
  RouteKind route_kind = RouteKind::lane_keep;
  std::uint64_t seed = 0;

  /// Problem instance at episode step k from the current state.
  ProblemInstance instance_at(const Environment& env, int k, const State& current,
                              std::uint32_t instance_id) const;
};

Scenario sample_scenario(const Environment& env, Rng& rng);

std::string to_string(RouteKind kind);

}  // namespace miso
