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
#include <span>
#include <vector>

#include "miso/core/rng.hpp"
#include "miso/optim/config.hpp"
#include "miso/optim/problem.hpp"
#include "miso/optim/solution.hpp"

namespace miso {

/// iLQR: Gauss-Newton cost expansion, first-order dynamics, Levenberg
/// regularization on Q_uu and backtracking line search. Controls are clamped
/// during forward rollouts. Returns the best trajectory seen.
Solution ilqr_solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg);

/// First-order box-DDP: as iLQR, but the backward pass clamps the feedforward
/// step into the box and zeroes the feedback rows of clamped coordinates.
Solution boxddp_solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg);

/// MPPI with per-sample noise streams derived from `seed`, so results do not
/// depend on the number of threads.
Solution mppi_solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg,
                    std::uint64_t seed);

/// Path-integral weighted average of the (unclamped) sample sequences:
/// w_k = exp(-(S_k - min S)/lambda) normalized; non-finite costs get weight 0.
/// Result is clamped to the problem bounds.
ControlSequence mppi_update(const ControlProblem& problem, std::span<const ControlSequence> samples,
                            std::span<const double> costs, double temperature);

/// Dispatch on cfg.algorithm. `seed` is only consumed by MPPI.
Solution solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg,
               std::uint64_t seed);

struct LqrSolution {
  Matrix controls;  // H x m
  double cost = 0.0;
};

/// Exact finite-horizon discrete Riccati recursion for the cost
/// sum x'Qx + u'Ru + x_H'Q_terminal x_H. Throws Error if R + B'PB is singular.
LqrSolution riccati_lqr(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const Matrix& Q_terminal, int horizon, const State& x0);

}  // namespace miso
