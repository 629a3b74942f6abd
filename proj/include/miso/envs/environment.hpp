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

#include <numbers>
#include <vector>

#include "miso/core/rng.hpp"
#include "miso/core/types.hpp"

namespace miso {

struct CartpolePhysics {
  double m_c = 1.0;   // kg
  double m_p = 0.3;   // kg
  double l = 0.5;     // m, pole point mass at distance l from the pivot
  double g = -9.81;   // m/s^2, negative = downward
  int n_sub_steps = 2;
};

struct ReacherPhysics {
  double damping = 0.01;
  double gear = 0.05;
  double link1 = 0.1;  // m
  double link2 = 0.1;  // m
  double mass1 = 0.05; // kg, point mass at the end of link 1
  double mass2 = 0.05; // kg, point mass at the end of link 2
  double wrist_limit = 160.0 * std::numbers::pi / 180.0;
};

struct DrivingPhysics {
  double wheelbase = 3.0;  // m
  double v_min_linearization = 0.01;  // m/s
  double max_steer = 60.0 * std::numbers::pi / 180.0;
};

/// All constants describing one environment. Immutable once wrapped in an
/// Environment.
struct EnvParams {
  EnvId id = EnvId::toy1d;
  int n = 1;
  int m = 1;
  int horizon = 5;
  double dt = 1.0;
  Vector u_min;
  Vector u_max;
  Vector Q;           // diagonal stage state weights
  Vector R;           // diagonal control weights
  Vector Q_terminal;  // diagonal terminal state weights
  int episode_length = 1;  // T_env
  double divergence_penalty = 1e3;
  CartpolePhysics cartpole;
  ReacherPhysics reacher;
  DrivingPhysics driving;

  /// Throws ConfigError if an invariant is violated.
  void validate() const;
};

EnvParams default_params(EnvId id);

struct Linearization {
  Matrix A;  // n x n
  Matrix B;  // n x m
};

/// Second-order (Gauss-Newton) expansion of one cost term.
struct CostExpansion {
  double value = 0.0;
  Vector cx;
  Vector cu;
  Matrix cxx;
  Matrix cuu;
  Matrix cux;  // m x n
};

class Environment {
 public:
  explicit Environment(EnvParams params);
  static Environment make(EnvId id) { return Environment(default_params(id)); }

  const EnvParams& params() const { return p_; }
  EnvId id() const { return p_.id; }
  int state_dim() const { return p_.n; }
  int control_dim() const { return p_.m; }
  int horizon() const { return p_.horizon; }
  double dt() const { return p_.dt; }
  const Vector& u_min() const { return p_.u_min; }
  const Vector& u_max() const { return p_.u_max; }

  Control clamp(const Control& u) const;
  ControlSequence clamp(const ControlSequence& u) const;
  bool within_bounds(const ControlSequence& u) const;

  /// One control step (cartpole integrates n_sub_steps sub-steps). Controls are
  /// clamped to the bounds. Throws DimensionError / Error on bad input.
  State step(const State& x, const Control& u) const;

  /// Exact Jacobians of step() via forward-mode differentiation. Driving
  /// linearizes at |v| >= v_min_linearization.
  Linearization jacobians(const State& x, const Control& u) const;

  /// Running cost at step t (t = 0..H-1). toy1d charges c(x + u), the cost of
  /// the state the control leads to.
  double stage_cost(int t, const State& x, const Control& u, const ProblemInstance& psi) const;
  double terminal_cost(const State& x, const ProblemInstance& psi) const;
  CostExpansion stage_expansion(int t, const State& x, const Control& u,
                                const ProblemInstance& psi) const;
  CostExpansion terminal_expansion(const State& x, const ProblemInstance& psi) const;

  /// Fresh instance from the documented sampling ranges; deterministic in rng.
  ProblemInstance sample_instance(Rng& rng) const;

  /// Checks x0/goal/reference shapes against this environment.
  void validate_instance(const ProblemInstance& psi) const;

  /// Tracking error states[t] - target for t = 0..H. Returns false when the
  /// stage carries no state cost (driving t = 0, toy).
  bool state_error(int t, const State& x, const ProblemInstance& psi, Vector& err) const;

  /// End-effector position of the reacher arm for joint angles (q1, q2).
  Eigen::Vector2d reacher_fingertip(double q1, double q2) const;

 private:
  EnvParams p_;
};

/// Toy cost c(x) = (x^2 + 0.05)(x + 1.5)^2 (x - 2)^2, written as r(x)^2.
double toy_cost(double x);
double toy_residual(double x);
double toy_residual_derivative(double x);

}  // namespace miso
