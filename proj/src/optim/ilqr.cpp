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

namespace miso {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Gains {
  std::vector<Vector> k;  // feedforward
  std::vector<Matrix> K;  // feedback
  double expected_linear = 0.0;     // sum k'Q_u
  double expected_quadratic = 0.0;  // sum 0.5 k'Q_uu k
};

// Riccati-like sweep on the linearized dynamics. Returns false if a regularized
// Q_uu is not positive definite or a non-finite value appears.
bool backward_pass(const ControlProblem& problem, const Trajectory& nominal, double reg, bool box, Gains& g) {
  const int H = problem.horizon();
  const int m = problem.control_dim();
  g.k.assign(H, Vector());
  g.K.assign(H, Matrix());
  g.expected_linear = 0.0;
  g.expected_quadratic = 0.0;

  const CostExpansion term = problem.terminal_expansion(nominal.states.row(H).transpose());
  Vector Vx = term.cx;
  Matrix Vxx = term.cxx;
  for (int t = H - 1; t >= 0; --t) {
    const State x = nominal.states.row(t).transpose();
    const Control u = nominal.controls.row(t).transpose();
    const Linearization lin = problem.jacobians(x, u);
    const CostExpansion l = problem.stage_expansion(t, x, u);

    const Vector Qx = l.cx + lin.A.transpose() * Vx;
    const Vector Qu = l.cu + lin.B.transpose() * Vx;
    const Matrix VxxA = Vxx * lin.A;
    const Matrix Qxx = l.cxx + lin.A.transpose() * VxxA;
    const Matrix Quu = l.cuu + lin.B.transpose() * Vxx * lin.B;
    const Matrix Qux = l.cux + lin.B.transpose() * VxxA;

    Matrix Quu_reg = Quu;
    Quu_reg.diagonal().array() += reg;
    Eigen::LLT<Matrix> llt(Quu_reg);
    if (llt.info() != Eigen::Success) return false;
    Vector k = -llt.solve(Qu);
    Matrix K = -llt.solve(Qux);
    if (!k.allFinite() || !K.allFinite()) return false;

    if (box) {
      for (int j = 0; j < m; ++j) {
        const double target = u[j] + k[j];
        const double lo = problem.u_min()[j];
        const double hi = problem.u_max()[j];
        if (target > hi || target < lo) {
          k[j] = std::clamp(target, lo, hi) - u[j];
          K.row(j).setZero();
        }
      }
    }

    Vx = Qx + K.transpose() * Quu * k + K.transpose() * Qu + Qux.transpose() * k;
    Vxx = Qxx + K.transpose() * Quu * K + K.transpose() * Qux + Qux.transpose() * K;
    Vxx = 0.5 * (Vxx + Vxx.transpose()).eval();
    g.expected_linear += k.dot(Qu);
    g.expected_quadratic += 0.5 * k.dot(Quu * k);
    g.k[t] = std::move(k);
    g.K[t] = std::move(K);
  }
  return true;
}

// Closed-loop forward rollout with step size alpha; controls clamped to the box.
bool forward_pass(const ControlProblem& problem, const Trajectory& nominal, const Gains& g, double alpha,
                  Trajectory& out) {
  const int H = problem.horizon();
  ControlSequence u(Matrix(H, problem.control_dim()));
  State x = problem.initial_state();
  for (int t = 0; t < H; ++t) {
    const Vector dx = x - nominal.states.row(t).transpose();
    Control ut = nominal.controls.row(t).transpose() + alpha * g.k[t] + g.K[t] * dx;
    ut = ut.cwiseMax(problem.u_min()).cwiseMin(problem.u_max());
    if (!ut.allFinite()) return false;
    u.controls.row(t) = ut.transpose();
    x = problem.step(x, ut);
    if (!x.allFinite()) return false;
  }
  try {
    out = problem.rollout(u);
  } catch (const Error&) {
    return false;
  }
  return std::isfinite(out.cost);
}

Solution ddp_solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg,
                   bool box) {
  cfg.validate();
  const auto start = Clock::now();
  const int H = problem.horizon();
  if (init.horizon() != H || init.dim() != problem.control_dim())
    throw DimensionError("initialization must be H x m");

  Solution sol;
  Trajectory current;
  const ControlSequence clamped = problem.clamp(init);
  bool init_ok = true;
  try {
    current = problem.rollout(clamped);
    init_ok = std::isfinite(current.cost);
  } catch (const Error&) {
    init_ok = false;
  }
  if (!init_ok) {
    sol.init_cost = std::numeric_limits<double>::infinity();
    current = problem.rollout(problem.clamp(ControlSequence::zeros(H, problem.control_dim())));
  } else {
    sol.init_cost = current.cost;
  }

  double reg = cfg.reg_init;
  Gains gains;
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (cfg.budget_mode == BudgetMode::wall_clock_ms && elapsed_ms(start) >= cfg.max_solve_time_ms) break;
    sol.iterations_used = it + 1;

    bool have_gains = false;
    while (!have_gains) {
      have_gains = backward_pass(problem, current, reg, box, gains);
      if (!have_gains) {
        reg *= 10.0;
        if (reg > cfg.reg_max) break;
      }
    }
    if (!have_gains) {
      sol.converged = false;
      break;
    }
    // Nothing left to gain at a stationary point of the local model.
    if (-(gains.expected_linear + gains.expected_quadratic) < cfg.tol) {
      sol.converged = true;
      break;
    }

    bool accepted = false;
    double alpha = 1.0;
    Trajectory candidate;
    for (int ls = 0; ls < cfg.max_linesearch_iter; ++ls, alpha *= 0.5) {
      if (forward_pass(problem, current, gains, alpha, candidate) && candidate.cost < current.cost) {
        accepted = true;
        break;
      }
    }
    if (accepted) {
      const double decrease = current.cost - candidate.cost;
      current = std::move(candidate);
      reg = std::max(cfg.reg_min, reg / 2.0);
      if (decrease < cfg.tol) {
        sol.converged = true;
        break;
      }
    } else {
      reg *= 10.0;
      if (reg > cfg.reg_max) {
        sol.converged = false;
        break;
      }
    }
  }
  sol.trajectory = std::move(current);
  sol.solve_time_ms = elapsed_ms(start);
  return sol;
}

}  // namespace

Solution ilqr_solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg) {
  return ddp_solve(problem, init, cfg, false);
}

Solution boxddp_solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg) {
  return ddp_solve(problem, init, cfg, true);
}

Solution solve(const ControlProblem& problem, const ControlSequence& init, const OptimizerConfig& cfg,
               std::uint64_t seed) {
  switch (cfg.algorithm) {
    case Algorithm::ilqr: return ilqr_solve(problem, init, cfg);
    case Algorithm::box_ddp: return boxddp_solve(problem, init, cfg);
    case Algorithm::mppi: return mppi_solve(problem, init, cfg, seed);
  }
  throw Error("unknown optimizer");
}

}  // namespace miso
