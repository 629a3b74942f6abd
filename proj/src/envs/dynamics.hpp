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

// Scalar-generic dynamics kernels shared by the value path (double) and the
// Jacobian path (forward-mode AutoDiffScalar).

#include <cmath>

#include "miso/envs/environment.hpp"

namespace miso::detail {

template <typename S>
S clamp_scalar(const S& v, double lo, double hi) {
  if (v < lo) return S(lo);
  if (v > hi) return S(hi);
  return v;
}

template <typename S>
void toy_step(const S* x, const S* u, S* out, const EnvParams&) {
  out[0] = x[0] + u[0];
}

// Frictionless cart-pole, pole modelled as a point mass at distance l, theta = 0
// upright. Semi-implicit Euler over n_sub_steps sub-steps.
// State: [x, x_dot, theta, theta_dot].
template <typename S>
void cartpole_step(const S* x, const S* u, S* out, const EnvParams& p) {
  using std::cos;
  using std::sin;
  const auto& c = p.cartpole;
  const double gravity = -c.g;
  const double h = p.dt / c.n_sub_steps;
  S pos = x[0], vel = x[1], th = x[2], om = x[3];
  const S force = u[0];
  for (int i = 0; i < c.n_sub_steps; ++i) {
    const S s = sin(th);
    const S co = cos(th);
    const S denom = c.m_c + c.m_p * s * s;
    const S xdd = (force + c.m_p * s * (c.l * om * om - gravity * co)) / denom;
    const S thdd = (gravity * s - co * xdd) / c.l;
    vel = vel + h * xdd;
    om = om + h * thdd;
    pos = pos + h * vel;
    th = th + h * om;
  }
  out[0] = pos;
  out[1] = vel;
  out[2] = th;
  out[3] = om;
}

// Planar two-link arm with point masses at the link tips, viscous joint damping
// treated implicitly, torque = gear * u. State: [q1, q2, q1_dot, q2_dot].
template <typename S>
void reacher_step(const S* x, const S* u, S* out, const EnvParams& p) {
  using std::cos;
  using std::sin;
  const auto& r = p.reacher;
  const double l1 = r.link1, l2 = r.link2, m1 = r.mass1, m2 = r.mass2;
  const S c2 = cos(x[1]);
  const S s2 = sin(x[1]);
  const double dd = p.dt * r.damping;
  const S M11 = (m1 + m2) * l1 * l1 + m2 * l2 * l2 + 2.0 * m2 * l1 * l2 * c2 + dd;
  const S M12 = m2 * l2 * l2 + m2 * l1 * l2 * c2;
  const S M22 = m2 * l2 * l2 + dd;
  const S hh = m2 * l1 * l2 * s2;
  const S bias1 = -hh * (2.0 * x[2] * x[3] + x[3] * x[3]);
  const S bias2 = hh * x[2] * x[2];
  const S r1 = r.gear * u[0] - bias1 - r.damping * x[2];
  const S r2 = r.gear * u[1] - bias2 - r.damping * x[3];
  const S det = M11 * M22 - M12 * M12;
  const S a1 = (M22 * r1 - M12 * r2) / det;
  const S a2 = (M11 * r2 - M12 * r1) / det;
  S dq1 = x[2] + p.dt * a1;
  S dq2 = x[3] + p.dt * a2;
  S q1 = x[0] + p.dt * dq1;
  S q2 = x[1] + p.dt * dq2;
  if (q2 > r.wrist_limit) {
    q2 = S(r.wrist_limit);
    dq2 = S(0.0);
  } else if (q2 < -r.wrist_limit) {
    q2 = S(-r.wrist_limit);
    dq2 = S(0.0);
  }
  out[0] = q1;
  out[1] = q2;
  out[2] = dq1;
  out[3] = dq2;
}

// Kinematic bicycle, forward Euler. State: [x, y, phi, v, delta]; control [a, delta_dot].
template <typename S>
void driving_step(const S* x, const S* u, S* out, const EnvParams& p) {
  using std::cos;
  using std::sin;
  using std::tan;
  const auto& d = p.driving;
  out[0] = x[0] + p.dt * x[3] * cos(x[2]);
  out[1] = x[1] + p.dt * x[3] * sin(x[2]);
  out[2] = x[2] + p.dt * x[3] * tan(x[4]) / d.wheelbase;
  out[3] = x[3] + p.dt * u[0];
  out[4] = clamp_scalar(S(x[4] + p.dt * u[1]), -d.max_steer, d.max_steer);
}

}  // namespace miso::detail
