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

#include <chrono>
#include <cmath>
#include <limits>

#include "miso/core/error.hpp"
#include "miso/optim/optimizers.hpp"
#include "miso/parallel/kernels.hpp"

namespace miso {

ControlSequence mppi_update(const ControlProblem& problem, std::span<const ControlSequence> samples,
                            std::span<const double> costs, double temperature) {
  if (samples.empty() || samples.size() != costs.size()) throw DimensionError("mppi_update: sample/cost mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (double c : costs) best = std::min(best, c);
  if (!std::isfinite(best)) throw Error("mppi_update: all sample costs are non-finite");

  std::vector<double> w(samples.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (std::isfinite(costs[k])) w[k] = std::exp(-(costs[k] - best) / temperature);
    total += w[k];
  }
  Matrix mean = Matrix::Zero(samples.front().horizon(), samples.front().dim());
  for (std::size_t k = 0; k < samples.size(); ++k)
    if (w[k] > 0.0) mean += (w[k] / total) * samples[k].controls;
  return problem.clamp(ControlSequence(std::move(mean)));
}

Solution mppi_solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg,
                    std::uint64_t seed) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const int H = problem.horizon();
  const int m = problem.control_dim();
  if (init.horizon() != H || init.dim() != m) throw DimensionError("initialization must be H x m");

  Solution sol;
  ControlSequence u = problem.clamp(init);
  Trajectory best;
  try {
    best = problem.rollout(u);
  } catch (const Error&) {
    best.cost = std::numeric_limits<double>::infinity();
  }
  sol.init_cost = std::isfinite(best.cost) ? best.cost : std::numeric_limits<double>::infinity();
  if (!std::isfinite(best.cost)) {
    u = problem.clamp(ControlSequence::zeros(H, m));
    best = problem.rollout(u);
  }

  const Vector sigma = Vector::Constant(m, std::sqrt(cfg.mppi.noise_sigma2));
  Rng rng = make_rng(seed);
  sol.converged = true;
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (cfg.budget_mode == BudgetMode::wall_clock_ms &&
        std::chrono::duration<double, std::milli>(Clock::now() - start).count() >= cfg.max_solve_time_ms)
      break;
    sol.iterations_used = it + 1;
    const std::uint64_t iter_seed = rng();
    std::vector<ControlSequence> samples =
        kernels::perturb(u, cfg.mppi.num_samples, sigma, iter_seed, default_exec());
    std::vector<ControlSequence> clamped(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) clamped[k] = problem.clamp(samples[k]);
    const std::vector<double> costs = kernels::rollout_costs(problem, clamped, default_exec());

    std::size_t arg = 0;
    for (std::size_t k = 1; k < costs.size(); ++k)
      if (costs[k] < costs[arg]) arg = k;
    if (!std::isfinite(costs[arg])) {
      sol.converged = false;
      break;
    }
    u = mppi_update(problem, samples, costs, cfg.mppi.temperature);

    double mean_cost = std::numeric_limits<double>::infinity();
    Trajectory mean_traj;
    try {
      mean_traj = problem.rollout(u);
      mean_cost = mean_traj.cost;
    } catch (const Error&) {
    }
    if (std::isfinite(mean_cost) && mean_cost <= costs[arg]) {
      if (mean_cost < best.cost) best = std::move(mean_traj);
    } else if (costs[arg] < best.cost) {
      best = problem.rollout(clamped[arg]);
    }
  }
  sol.trajectory = std::move(best);
  sol.solve_time_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return sol;
}

}  // namespace miso
