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

#include "miso/optim/problem.hpp"

#include <cmath>

#include "miso/core/error.hpp"

namespace miso {

ControlSequence ControlProblem::clamp(const ControlSequence& u) const {
  Matrix out = u.controls;
  for (Eigen::Index t = 0; t < out.rows(); ++t)
    out.row(t) = out.row(t).cwiseMax(u_min().transpose()).cwiseMin(u_max().transpose());
  return ControlSequence(std::move(out));
}

Trajectory ControlProblem::rollout(const ControlSequence& u) const {
  const int H = horizon();
  if (u.horizon() != H || u.dim() != control_dim()) throw DimensionError("rollout: control sequence shape mismatch");
  Trajectory traj;
  traj.states.resize(H + 1, state_dim());
  traj.controls = u.controls;
  State x = initial_state();
  traj.states.row(0) = x.transpose();
  double cost = 0.0;
  for (int t = 0; t < H; ++t) {
    const Control ut = u.at(t);
    if (!ut.allFinite()) throw DivergenceError(static_cast<std::size_t>(t));
    cost += stage_cost(t, x, ut);
    x = step(x, ut);
    if (!x.allFinite()) throw DivergenceError(static_cast<std::size_t>(t + 1));
    traj.states.row(t + 1) = x.transpose();
  }
  cost += terminal_cost(x);
  traj.cost = cost;
  return traj;
}

double ControlProblem::cost_or_inf(const ControlSequence& u) const {
  try {
    const double c = rollout(u).cost;
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

EnvProblem::EnvProblem(const Environment& env, const ProblemInstance& psi) : env_(env), psi_(psi) {
  env_.validate_instance(psi_);
}

LinearQuadraticProblem::LinearQuadraticProblem(Matrix A, Matrix B, Matrix Q, Matrix R, Matrix Q_terminal,
                                               int horizon, State x0)
    : A_(std::move(A)), B_(std::move(B)), Q_(std::move(Q)), R_(std::move(R)), Qf_(std::move(Q_terminal)),
      horizon_(horizon), x0_(std::move(x0)) {
  const auto n = A_.rows();
  const auto m = B_.cols();
  if (A_.cols() != n || B_.rows() != n || Q_.rows() != n || Q_.cols() != n || Qf_.rows() != n ||
      Qf_.cols() != n || R_.rows() != m || R_.cols() != m || x0_.size() != n)
    throw DimensionError("LinearQuadraticProblem: inconsistent shapes");
  lo_ = Vector::Constant(m, -std::numeric_limits<double>::infinity());
  hi_ = Vector::Constant(m, std::numeric_limits<double>::infinity());
}

void LinearQuadraticProblem::set_bounds(Vector lo, Vector hi) {
  lo_ = std::move(lo);
  hi_ = std::move(hi);
}

State LinearQuadraticProblem::step(const State& x, const Control& u) const {
  return A_ * x + B_ * u.cwiseMax(lo_).cwiseMin(hi_);
}

double LinearQuadraticProblem::stage_cost(int, const State& x, const Control& u) const {
  return x.dot(Q_ * x) + u.dot(R_ * u);
}

double LinearQuadraticProblem::terminal_cost(const State& x) const { return x.dot(Qf_ * x); }

CostExpansion LinearQuadraticProblem::stage_expansion(int t, const State& x, const Control& u) const {
  CostExpansion e;
  e.value = stage_cost(t, x, u);
  e.cx = 2.0 * Q_ * x;
  e.cu = 2.0 * R_ * u;
  e.cxx = 2.0 * Q_;
  e.cuu = 2.0 * R_;
  e.cux = Matrix::Zero(R_.rows(), Q_.rows());
  return e;
}

CostExpansion LinearQuadraticProblem::terminal_expansion(const State& x) const {
  CostExpansion e;
  e.value = terminal_cost(x);
  e.cx = 2.0 * Qf_ * x;
  e.cxx = 2.0 * Qf_;
  return e;
}

}  // namespace miso
