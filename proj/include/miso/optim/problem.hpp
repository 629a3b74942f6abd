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

#include <limits>

#include "miso/core/types.hpp"
#include "miso/envs/environment.hpp"

namespace miso {

/// What the local optimizers need from a finite-horizon control problem.
class ControlProblem {
 public:
  virtual ~ControlProblem() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual int horizon() const = 0;
  virtual const State& initial_state() const = 0;
  virtual const Vector& u_min() const = 0;
  virtual const Vector& u_max() const = 0;

  virtual State step(const State& x, const Control& u) const = 0;
  virtual Linearization jacobians(const State& x, const Control& u) const = 0;
  virtual double stage_cost(int t, const State& x, const Control& u) const = 0;
  virtual double terminal_cost(const State& x) const = 0;
  virtual CostExpansion stage_expansion(int t, const State& x, const Control& u) const = 0;
  virtual CostExpansion terminal_expansion(const State& x) const = 0;

  ControlSequence clamp(const ControlSequence& u) const;

  /// Rollout from initial_state(); cost summed in index order. Throws
  /// DivergenceError on non-finite states.
  Trajectory rollout(const ControlSequence& u) const;

  /// Rollout cost or +infinity on divergence.
  double cost_or_inf(const ControlSequence& u) const;
};

/// An Environment paired with one problem instance.
class EnvProblem final : public ControlProblem {
 public:
  EnvProblem(const Environment& env, const ProblemInstance& psi);

  int state_dim() const override { return env_.state_dim(); }
  int control_dim() const override { return env_.control_dim(); }
  int horizon() const override { return env_.horizon(); }
  const State& initial_state() const override { return psi_.x0; }
  const Vector& u_min() const override { return env_.u_min(); }
  const Vector& u_max() const override { return env_.u_max(); }

  State step(const State& x, const Control& u) const override { return env_.step(x, u); }
  Linearization jacobians(const State& x, const Control& u) const override { return env_.jacobians(x, u); }
  double stage_cost(int t, const State& x, const Control& u) const override {
    return env_.stage_cost(t, x, u, psi_);
  }
  double terminal_cost(const State& x) const override { return env_.terminal_cost(x, psi_); }
  CostExpansion stage_expansion(int t, const State& x, const Control& u) const override {
    return env_.stage_expansion(t, x, u, psi_);
  }
  CostExpansion terminal_expansion(const State& x) const override { return env_.terminal_expansion(x, psi_); }

  const Environment& env() const { return env_; }
  const ProblemInstance& instance() const { return psi_; }

 private:
  const Environment& env_;
  const ProblemInstance& psi_;
};

/// Linear dynamics x' = A x + B u with cost sum x'Qx + u'Ru + x_H' Qf x_H.
/// Bounds default to +-infinity.
class LinearQuadraticProblem final : public ControlProblem {
 public:
  LinearQuadraticProblem(Matrix A, Matrix B, Matrix Q, Matrix R, Matrix Q_terminal, int horizon, State x0);

  void set_bounds(Vector lo, Vector hi);

  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int control_dim() const override { return static_cast<int>(B_.cols()); }
  int horizon() const override { return horizon_; }
  const State& initial_state() const override { return x0_; }
  const Vector& u_min() const override { return lo_; }
  const Vector& u_max() const override { return hi_; }

  State step(const State& x, const Control& u) const override;
  Linearization jacobians(const State&, const Control&) const override { return {A_, B_}; }
  double stage_cost(int t, const State& x, const Control& u) const override;
  double terminal_cost(const State& x) const override;
  CostExpansion stage_expansion(int t, const State& x, const Control& u) const override;
  CostExpansion terminal_expansion(const State& x) const override;

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& Q() const { return Q_; }
  const Matrix& R() const { return R_; }
  const Matrix& Q_terminal() const { return Qf_; }

 private:
  Matrix A_, B_, Q_, R_, Qf_;
  int horizon_;
  State x0_;
  Vector lo_, hi_;
};

}  // namespace miso
