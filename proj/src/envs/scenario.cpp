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

#include "miso/envs/scenario.hpp"

#include <cmath>
#include <numbers>

#include "miso/core/error.hpp"

namespace miso {

std::string to_string(RouteKind kind) {
  switch (kind) {
    case RouteKind::lane_keep: return "lane_keep";
    case RouteKind::lane_change: return "lane_change";
    case RouteKind::arc: return "arc";
    case RouteKind::abrupt_switch: return "abrupt_switch";
  }
  return "unknown";
}

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double wrap_near(double angle, double reference) {
  const double two_pi = 2.0 * std::numbers::pi;
  return angle - two_pi * std::round((angle - reference) / two_pi);
}

Matrix make_route(const Environment& env, RouteKind kind, Rng& rng) {
  const auto& p = env.params();
  const int rows = p.episode_length + p.horizon + 1;
  const double v_ref = uniform(rng, 3.0, 10.0);
  const double ds = v_ref * p.dt;
  Matrix route = Matrix::Zero(rows, p.n);
  for (int k = 0; k < rows; ++k) route(k, 3) = v_ref;

  switch (kind) {
    case RouteKind::lane_keep:
      for (int k = 0; k < rows; ++k) route(k, 0) = k * ds;
      break;
    case RouteKind::lane_change: {
      const double offset = (rng() & 1U) ? 3.5 : -3.5;
      const int start = static_cast<int>(uniform(rng, 2.0, std::max(3.0, p.episode_length * 0.6)));
      const double duration = 15.0;
      auto lateral = [&](double k) {
        const double s = std::clamp((k - start) / duration, 0.0, 1.0);
        return offset * s * s * (3.0 - 2.0 * s);
      };
      for (int k = 0; k < rows; ++k) {
        route(k, 0) = k * ds;
        route(k, 1) = lateral(k);
        route(k, 2) = std::atan2(lateral(k + 0.5) - lateral(k - 0.5), ds);
      }
      break;
    }
    case RouteKind::arc: {
      double kappa = uniform(rng, 0.01, 0.04);
      if (rng() & 1U) kappa = -kappa;
      const double steer = std::atan(p.driving.wheelbase * kappa);
      for (int k = 0; k < rows; ++k) {
        const double s = k * ds;
        route(k, 0) = std::sin(kappa * s) / kappa;
        route(k, 1) = (1.0 - std::cos(kappa * s)) / kappa;
        route(k, 2) = kappa * s;
        route(k, 4) = steer;
      }
      break;
    }
    case RouteKind::abrupt_switch: {
      // The reference jumps one lane over without transition.
      const double offset = (rng() & 1U) ? 3.5 : -3.5;
      const int start = static_cast<int>(uniform(rng, 1.0, std::max(2.0, p.episode_length * 0.6)));
      for (int k = 0; k < rows; ++k) {
        route(k, 0) = k * ds;
        route(k, 1) = k >= start ? offset : 0.0;
      }
      break;
    }
  }
  return route;
}

}  // namespace

Scenario sample_scenario(const Environment& env, Rng& rng) {
  const auto& p = env.params();
  Scenario sc;
  sc.env_id = p.id;
  sc.x0 = State::Zero(p.n);
  switch (p.id) {
    case EnvId::toy1d:
      sc.goal = State::Zero(1);
      break;
    case EnvId::cartpole: {
      const double pi = std::numbers::pi;
      sc.x0 << uniform(rng, -2.0, 2.0), uniform(rng, -1.0, 1.0), uniform(rng, -pi / 2, pi / 2),
          uniform(rng, -pi / 4, pi / 4);
      sc.goal = State::Zero(4);
      sc.goal[0] = uniform(rng, -2.0, 2.0);
      break;
    }
    case EnvId::reacher: {
      const auto& r = p.reacher;
      const double pi = std::numbers::pi;
      sc.x0 << uniform(rng, -pi, pi), uniform(rng, -r.wrist_limit, r.wrist_limit), 0.0, 0.0;
      const double theta = uniform(rng, 0.0, 2.0 * pi);
      const double radius = uniform(rng, 0.05, 0.20);
      const double px = radius * std::cos(theta);
      const double py = radius * std::sin(theta);
      // Inverse kinematics; keep the elbow on the same side as the start pose.
      const double c2 = std::clamp((radius * radius - r.link1 * r.link1 - r.link2 * r.link2) /
                                       (2.0 * r.link1 * r.link2),
                                   -1.0, 1.0);
      double q2 = std::acos(c2);
      if (sc.x0[1] < 0.0) q2 = -q2;
      q2 = std::clamp(q2, -r.wrist_limit, r.wrist_limit);
      double q1 = std::atan2(py, px) - std::atan2(r.link2 * std::sin(q2), r.link1 + r.link2 * std::cos(q2));
      q1 = wrap_near(q1, sc.x0[0]);
      sc.goal = State::Zero(4);
      sc.goal << q1, q2, 0.0, 0.0;
      break;
    }
    case EnvId::driving: {
      sc.route_kind = static_cast<RouteKind>(rng() % 4);
      sc.route = make_route(env, sc.route_kind, rng);
      const double v_ref = sc.route(0, 3);
      sc.x0 << 0.0, uniform(rng, -0.5, 0.5), uniform(rng, -0.05, 0.05), v_ref * uniform(rng, 0.8, 1.2), 0.0;
      break;
    }
  }
  return sc;
}

ProblemInstance Scenario::instance_at(const Environment& env, int k, const State& current,
                                      std::uint32_t instance_id) const {
  ProblemInstance psi;
  psi.env_id = env_id;
  psi.x0 = current;
  psi.instance_id = instance_id;
  psi.seed = seed;
  if (env_id == EnvId::driving) {
    const int H = env.horizon();
    if (k < 0 || k + H + 1 > route.rows()) throw DimensionError("scenario step outside the route");
    psi.reference = route.middleRows(k + 1, H);
  } else {
    psi.goal = goal;
  }
  return psi;
}

}  // namespace miso
