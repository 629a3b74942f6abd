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

#include <span>
#include <vector>

#include "miso/optim/problem.hpp"
#include "miso/parallel/exec.hpp"

namespace miso::kernels {

/// Rollout cost of every sequence (+infinity on divergence).
std::vector<double> rollout_costs(const ControlProblem& problem, std::span<const ControlSequence> sequences,
                                  Exec exec);

/// Gaussian perturbations u + eps_k with eps_k[t, j] ~ N(0, sigma[j]^2), drawn
/// from per-sample streams derive_seed(seed, k). Returned unclamped.
std::vector<ControlSequence> perturb(const ControlSequence& u, int count, const Vector& sigma,
                                     std::uint64_t seed, Exec exec);

}  // namespace miso::kernels
