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

#include "miso/envs/environment.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/AutoDiff>

#include "dynamics.hpp"
#include "miso/core/error.hpp"
#include "miso/envs/scenario.hpp"

namespace miso {

std::string_view to_string(EnvId id) {
  switch (id) {
    case EnvId::toy1d: return "toy1d";
    case EnvId::cartpole: return "cartpole";
    case EnvId::reacher: return "reacher";
    case EnvId::driving: return "driving";
  }
  return "unknown";
}

EnvId env_id_from_string(std::string_view name) {
  if (name == "toy1d" || name == "toy") return EnvId::toy1d;
  if (name == "cartpole") return EnvId::cartpole;
  if (name == "reacher") return EnvId::reacher;
  if (name == "driving") return EnvId::driving;
  throw ConfigError("unknown environment '" + std::string(name) + "'");
}

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

EnvParams default_params(EnvId id) {
  EnvParams p;
  p.id = id;
  switch (id) {
    case EnvId::toy1d:
      p.n = 1;
      p.m = 1;
      p.horizon = 5;
      p.dt = 1.0;
      p.u_min = vec({-1.0});
      p.u_max = vec({1.0});
      p.Q = vec({0.0});
      p.R = vec({0.0});
      p.Q_terminal = vec({0.0});
      p.episode_length = 5;
      p.divergence_penalty = 1e3;
      break;
    case EnvId::cartpole:
      p.n = 4;
      p.m = 1;
      p.horizon = 10;
      p.dt = 0.1;
      p.u_min = vec({-5.5});
      p.u_max = vec({5.5});
      // Paper weights [0.1, 0.01, 1.0, 0.01] are listed for (theta, theta_dot, x, x_dot).
      p.Q = vec({1.0, 0.01, 0.1, 0.01});
      p.R = vec({1e-4});
      p.Q_terminal = p.Q;
      p.episode_length = 50;
      p.divergence_penalty = 1e3;
      break;
    case EnvId::reacher:
      p.n = 4;
      p.m = 2;
      p.horizon = 10;
      p.dt = 0.02;
      p.u_min = vec({-1.0, -1.0});
      p.u_max = vec({1.0, 1.0});
      p.Q = vec({1.0, 1.0, 0.01, 0.01});
      p.R = vec({1e-3, 1e-3});
      p.Q_terminal = p.Q;
      p.episode_length = 250;
      p.divergence_penalty = 1e3;
      break;
    case EnvId::driving:
      p.n = 5;
      p.m = 2;
      p.horizon = 40;
      p.dt = 0.2;
      p.u_min = vec({-3.0, -0.5});
      p.u_max = vec({3.0, 0.5});
      p.Q = vec({1.0, 1.0, 10.0, 0.0, 0.0});
      p.R = vec({1.0, 10.0});
      p.Q_terminal = p.Q;
      p.episode_length = 50;
      p.divergence_penalty = 1e4;
      break;
  }
  return p;
}

void EnvParams::validate() const {
  if (n < 1 || m < 1) throw ConfigError("state and control dimensions must be positive");
  if (horizon < 1) throw ConfigError("horizon H must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (u_min.size() != m || u_max.size() != m) throw ConfigError("u_min/u_max must have m entries");
  if (((u_max - u_min).array() <= 0.0).any()) throw ConfigError("u_min must be < u_max elementwise");
  if (Q.size() != n || Q_terminal.size() != n || R.size() != m)
    throw ConfigError("Q/Q_terminal need n entries and R needs m entries");
  if ((Q.array() < 0.0).any() || (Q_terminal.array() < 0.0).any() || (R.array() < 0.0).any())
    throw ConfigError("cost weights must be non-negative");
  if (episode_length < 1) throw ConfigError("T_env must be >= 1");
  if (cartpole.m_c <= 0 || cartpole.m_p <= 0 || cartpole.l <= 0 || cartpole.n_sub_steps < 1)
    throw ConfigError("cart-pole masses, length and sub-steps must be positive");
  if (reacher.link1 <= 0 || reacher.link2 <= 0 || reacher.mass1 <= 0 || reacher.mass2 <= 0)
    throw ConfigError("reacher masses and lengths must be positive");
  if (driving.wheelbase <= 0) throw ConfigError("wheelbase must be positive");
}

Environment::Environment(EnvParams params) : p_(std::move(params)) { p_.validate(); }

Control Environment::clamp(const Control& u) const { return u.cwiseMax(p_.u_min).cwiseMin(p_.u_max); }

ControlSequence Environment::clamp(const ControlSequence& u) const {
  Matrix out = u.controls;
  for (Eigen::Index t = 0; t < out.rows(); ++t)
    out.row(t) = out.row(t).cwiseMax(p_.u_min.transpose()).cwiseMin(p_.u_max.transpose());
  return ControlSequence(std::move(out));
}

bool Environment::within_bounds(const ControlSequence& u) const {
  for (Eigen::Index t = 0; t < u.controls.rows(); ++t)
    for (Eigen::Index j = 0; j < u.controls.cols(); ++j) {
      const double v = u.controls(t, j);
      if (!(v >= p_.u_min[j] && v <= p_.u_max[j])) return false;
    }
  return true;
}

namespace {

template <typename S>
void dispatch_step(const EnvParams& p, const S* x, const S* u, S* out) {
  switch (p.id) {
    case EnvId::toy1d: detail::toy_step(x, u, out, p); break;
    case EnvId::cartpole: detail::cartpole_step(x, u, out, p); break;
    case EnvId::reacher: detail::reacher_step(x, u, out, p); break;
    case EnvId::driving: detail::driving_step(x, u, out, p); break;
  }
}

template <int N>
Linearization jacobians_fixed(const EnvParams& p, const State& x, const Control& u) {
  using Deriv = Eigen::Matrix<double, N, 1>;
  using AD = Eigen::AutoDiffScalar<Deriv>;
  const int n = p.n;
  const int m = p.m;
  std::array<AD, N> xs;
  std::array<AD, N> us;
  std::array<AD, N> out;
  out.fill(AD(0.0, Deriv::Zero()));
  for (int i = 0; i < n; ++i) xs[i] = AD(x[i], N, i);
  for (int j = 0; j < m; ++j) {
    const double lo = p.u_min[j], hi = p.u_max[j];
    if (u[j] < lo || u[j] > hi) {
      us[j] = AD(std::clamp(u[j], lo, hi), Deriv::Zero());
    } else {
      us[j] = AD(u[j], N, n + j);
    }
  }
  dispatch_step<AD>(p, xs.data(), us.data(), out.data());
  Linearization lin{Matrix(n, n), Matrix(n, m)};
  for (int i = 0; i < n; ++i) {
    const Deriv& d = out[i].derivatives();
    for (int k = 0; k < n; ++k) lin.A(i, k) = d[k];
    for (int j = 0; j < m; ++j) lin.B(i, j) = d[n + j];
  }
  return lin;
}

}  // namespace

State Environment::step(const State& x, const Control& u) const {
  if (x.size() != p_.n || u.size() != p_.m) throw DimensionError("step: state/control dimension mismatch");
  if (!x.allFinite() || !u.allFinite()) throw Error("step: non-finite input");
  const Control uc = clamp(u);
  State out(p_.n);
  dispatch_step<double>(p_, x.data(), uc.data(), out.data());
  return out;
}

Linearization Environment::jacobians(const State& x, const Control& u) const {
  if (x.size() != p_.n || u.size() != p_.m) throw DimensionError("jacobians: dimension mismatch");
  if (!x.allFinite() || !u.allFinite()) throw Error("jacobians: non-finite input");
  State xl = x;
  if (p_.id == EnvId::driving) {
    const double vmin = p_.driving.v_min_linearization;
    if (std::abs(xl[3]) < vmin) xl[3] = std::signbit(xl[3]) ? -vmin : vmin;
  }
  switch (p_.id) {
    case EnvId::toy1d: return jacobians_fixed<2>(p_, xl, u);
    case EnvId::cartpole: return jacobians_fixed<5>(p_, xl, u);
    case EnvId::reacher: return jacobians_fixed<6>(p_, xl, u);
    case EnvId::driving: return jacobians_fixed<7>(p_, xl, u);
  }
  throw Error("jacobians: unknown environment");
}

bool Environment::state_error(int t, const State& x, const ProblemInstance& psi, Vector& err) const {
  switch (p_.id) {
    case EnvId::toy1d: return false;
    case EnvId::cartpole:
    case EnvId::reacher:
      err = x - *psi.goal;
      return true;
    case EnvId::driving:
      if (t == 0) return false;
      err = x - psi.reference->row(t - 1).transpose();
      return true;
  }
  return false;
}

double toy_residual(double x) { return std::sqrt(x * x + 0.05) * (x + 1.5) * (x - 2.0); }

double toy_residual_derivative(double x) {
  const double s = std::sqrt(x * x + 0.05);
  return x / s * (x + 1.5) * (x - 2.0) + s * (2.0 * x - 0.5);
}

double toy_cost(double x) {
  const double a = x + 1.5;
  const double b = x - 2.0;
  return (x * x + 0.05) * a * a * b * b;
}

double Environment::stage_cost(int t, const State& x, const Control& u, const ProblemInstance& psi) const {
  if (p_.id == EnvId::toy1d) return toy_cost(x[0] + clamp(u)[0]);
  double c = (u.array().square() * p_.R.array()).sum();
  Vector err;
  if (state_error(t, x, psi, err)) c += (err.array().square() * p_.Q.array()).sum();
  return c;
}

double Environment::terminal_cost(const State& x, const ProblemInstance& psi) const {
  if (p_.id == EnvId::toy1d) return 0.0;
  Vector err;
  if (!state_error(p_.horizon, x, psi, err)) return 0.0;
  return (err.array().square() * p_.Q_terminal.array()).sum();
}

CostExpansion Environment::stage_expansion(int t, const State& x, const Control& u,
                                           const ProblemInstance& psi) const {
  CostExpansion e;
  e.cx = Vector::Zero(p_.n);
  e.cu = Vector::Zero(p_.m);
  e.cxx = Matrix::Zero(p_.n, p_.n);
  e.cuu = Matrix::Zero(p_.m, p_.m);
  e.cux = Matrix::Zero(p_.m, p_.n);
  if (p_.id == EnvId::toy1d) {
    // Gauss-Newton on c(x + u) = r^2.
    const double next = x[0] + clamp(u)[0];
    const double r = toy_residual(next);
    const double dr = toy_residual_derivative(next);
    const double du = (u[0] < p_.u_min[0] || u[0] > p_.u_max[0]) ? 0.0 : 1.0;
    e.value = toy_cost(next);
    e.cx[0] = 2.0 * r * dr;
    e.cu[0] = du * e.cx[0];
    e.cxx(0, 0) = 2.0 * dr * dr;
    e.cuu(0, 0) = du * e.cxx(0, 0);
    e.cux(0, 0) = du * e.cxx(0, 0);
    return e;
  }
  e.value = stage_cost(t, x, u, psi);
  e.cu = 2.0 * p_.R.cwiseProduct(u);
  e.cuu.diagonal() = 2.0 * p_.R;
  Vector err;
  if (state_error(t, x, psi, err)) {
    e.cx = 2.0 * p_.Q.cwiseProduct(err);
    e.cxx.diagonal() = 2.0 * p_.Q;
  }
  return e;
}

CostExpansion Environment::terminal_expansion(const State& x, const ProblemInstance& psi) const {
  CostExpansion e;
  e.value = terminal_cost(x, psi);
  e.cx = Vector::Zero(p_.n);
  e.cxx = Matrix::Zero(p_.n, p_.n);
  Vector err;
  if (p_.id != EnvId::toy1d && state_error(p_.horizon, x, psi, err)) {
    e.cx = 2.0 * p_.Q_terminal.cwiseProduct(err);
    e.cxx.diagonal() = 2.0 * p_.Q_terminal;
  }
  return e;
}

void Environment::validate_instance(const ProblemInstance& psi) const {
  if (psi.env_id != p_.id) throw DimensionError("instance belongs to a different environment");
  if (psi.x0.size() != p_.n) throw DimensionError("x0 dimension does not match environment");
  if (p_.id == EnvId::driving) {
    if (psi.goal || !psi.reference) throw DimensionError("driving instances need a reference and no goal");
    if (psi.reference->rows() != p_.horizon || psi.reference->cols() != p_.n)
      throw DimensionError("reference must be H x n");
  } else {
    if (!psi.goal || psi.reference) throw DimensionError("goal-based instances need a goal and no reference");
    if (psi.goal->size() != p_.n) throw DimensionError("goal dimension does not match environment");
  }
}

Eigen::Vector2d Environment::reacher_fingertip(double q1, double q2) const {
  const auto& r = p_.reacher;
  return {r.link1 * std::cos(q1) + r.link2 * std::cos(q1 + q2),
          r.link1 * std::sin(q1) + r.link2 * std::sin(q1 + q2)};
}

ProblemInstance Environment::sample_instance(Rng& rng) const {
  const std::uint64_t seed = rng();
  Rng child = make_rng(seed);
  Scenario sc = sample_scenario(*this, child);
  ProblemInstance psi = sc.instance_at(*this, 0, sc.x0, 0);
  psi.seed = seed;
  return psi;
}

}  // namespace miso
