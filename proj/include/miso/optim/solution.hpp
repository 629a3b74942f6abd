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

struct Solution {
  Trajectory trajectory;
  int iterations_used = 0;
  bool converged = false;
  double init_cost = 0.0;  // cost of the (clamped) initialization rollout
  double solve_time_ms = 0.0;
};

}  // namespace miso
