#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fd.hpp"
#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/envs/config.hpp"
#include "miso/envs/environment.hpp"
#include "miso/envs/scenario.hpp"

using namespace miso;
using miso::testing::central_diff;
using miso::testing::rel_err;

namespace {

constexpr EnvId kAll[] = {EnvId::toy1d, EnvId::cartpole, EnvId::reacher, EnvId::driving};

State random_state(const Environment& env, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  State x(env.state_dim());
  for (int i = 0; i < x.size(); ++i) x[i] = u(rng);
  if (env.id() == EnvId::driving) x[3] = 2.0 + 4.0 * std::abs(x[3]);
  if (env.id() == EnvId::reacher) x[1] *= 2.0;  // stay inside the wrist limit
  return x;
}

Control random_control(const Environment& env, Rng& rng) {
  // Strictly inside the bounds so the clamp is differentiable.
  std::uniform_real_distribution<double> u(0.02, 0.98);
  Control c(env.control_dim());
  for (int j = 0; j < c.size(); ++j) c[j] = env.u_min()[j] + u(rng) * (env.u_max()[j] - env.u_min()[j]);
  return c;
}

}  // namespace

TEST_CASE("toy dynamics are x + u") {
  const Environment env(default_params(EnvId::toy1d));
  State x(1);
  x << 0.5;
  Control u(1);
  u << -0.3;
  CHECK(env.step(x, u)[0] == doctest::Approx(0.2).epsilon(1e-15));
  const auto lin = env.jacobians(x, u);
  CHECK(lin.A(0, 0) == 1.0);
  CHECK(lin.B(0, 0) == 1.0);
}

TEST_CASE("driving straight line step") {
  const Environment env(default_params(EnvId::driving));
  State x(5);
  x << 0, 0, 0, 1, 0;
  const State next = env.step(x, Control::Zero(2));
  State want(5);
  want << 0.2, 0, 0, 1, 0;
  CHECK((next - want).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("cartpole upright rest is an equilibrium") {
  const Environment env(default_params(EnvId::cartpole));
  for (double pos : {-2.0, 0.0, 1.3}) {
    State x = State::Zero(4);
    x[0] = pos;
    CHECK((env.step(x, Control::Zero(1)) - x).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("jacobians match central differences") {
  for (EnvId id : kAll) {
    const Environment env(default_params(id));
    Rng rng = make_rng(42 + static_cast<int>(id));
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const State x = random_state(env, rng);
      const Control u = random_control(env, rng);
      const auto lin = env.jacobians(x, u);
      const int n = env.state_dim(), m = env.control_dim();
      Matrix fd_a(n, n), fd_b(n, m);
      for (int i = 0; i < n; ++i) {
        const auto col = central_diff(
            [&](const Matrix& xx) { return env.step(xx.col(0), u)[i]; }, Matrix(x));
        fd_a.row(i) = col.col(0).transpose();
        const auto colu = central_diff(
            [&](const Matrix& uu) { return env.step(x, uu.col(0))[i]; }, Matrix(u));
        fd_b.row(i) = colu.col(0).transpose();
      }
      worst = std::max({worst, rel_err(lin.A, fd_a), rel_err(lin.B, fd_b)});
    }
    INFO("env " << to_string(id));
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("driving linearizes at the minimum velocity") {
  const Environment env(default_params(EnvId::driving));
  State slow(5);
  slow << 0, 0, 0.3, 0.001, 0.1;
  State clamped = slow;
  clamped[3] = 0.01;
  const Control u = Control::Zero(2);
  const auto a = env.jacobians(slow, u);
  const auto b = env.jacobians(clamped, u);
  CHECK((a.A - b.A).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.B - b.B).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("cost expansions match central differences") {
  for (EnvId id : kAll) {
    const Environment env(default_params(id));
    Rng rng = make_rng(7 + static_cast<int>(id));
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const auto psi = env.sample_instance(rng);
      const State x = random_state(env, rng);
      const Control u = random_control(env, rng);
      const int t = static_cast<int>(rng() % static_cast<std::uint64_t>(env.horizon()));
      const auto e = env.stage_expansion(t, x, u, psi);
      CHECK(e.value == doctest::Approx(env.stage_cost(t, x, u, psi)).epsilon(1e-12));
      const auto gx = central_diff([&](const Matrix& xx) { return env.stage_cost(t, xx.col(0), u, psi); }, Matrix(x));
      const auto gu = central_diff([&](const Matrix& uu) { return env.stage_cost(t, x, uu.col(0), psi); }, Matrix(u));
      const auto te = env.terminal_expansion(x, psi);
      const auto gt = central_diff([&](const Matrix& xx) { return env.terminal_cost(xx.col(0), psi); }, Matrix(x));
      worst = std::max({worst, rel_err(e.cx, gx, 1e-3), rel_err(e.cu, gu, 1e-3), rel_err(te.cx, gt, 1e-3)});
    }
    INFO("env " << to_string(id));
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("driving cost weights") {
  const Environment env(default_params(EnvId::driving));
  ProblemInstance psi;
  psi.env_id = EnvId::driving;
  psi.x0 = State::Zero(5);
  psi.reference = Matrix::Zero(env.horizon(), 5);
  State x = State::Zero(5);
  x[0] = 1.0;
  CHECK(env.stage_cost(1, x, Control::Zero(2), psi) == doctest::Approx(1.0).epsilon(1e-15));
  x << 0, 0, 1, 0, 0;
  CHECK(env.stage_cost(1, x, Control::Zero(2), psi) == doctest::Approx(10.0).epsilon(1e-15));
  Control u(2);
  u << 1, 1;
  CHECK(env.stage_cost(0, State::Zero(5), u, psi) == doctest::Approx(11.0).epsilon(1e-15));
}

TEST_CASE("cartpole cost at goal is zero") {
  const Environment env(default_params(EnvId::cartpole));
  Rng rng = make_rng(1);
  auto psi = env.sample_instance(rng);
  CHECK(env.stage_cost(0, *psi.goal, Control::Zero(1), psi) == 0.0);
  CHECK(env.terminal_cost(*psi.goal, psi) == 0.0);
}

TEST_CASE("sampled instances stay inside their ranges") {
  const double pi = std::numbers::pi;
  const Environment cart(default_params(EnvId::cartpole));
  const Environment reach(default_params(EnvId::reacher));
  const Environment drive(default_params(EnvId::driving));
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng r1 = make_rng(seed);
    const auto c = cart.sample_instance(r1);
    REQUIRE(std::abs(c.x0[0]) <= 2.0);
    REQUIRE(std::abs(c.x0[1]) <= 1.0);
    REQUIRE(std::abs(c.x0[2]) <= pi / 2);
    REQUIRE(std::abs(c.x0[3]) <= pi / 4);
    REQUIRE(std::abs((*c.goal)[0]) <= 2.0);
    REQUIRE(c.goal->tail(3).isZero(0.0));

    Rng r2 = make_rng(seed);
    const auto r = reach.sample_instance(r2);
    const double radius = reach.reacher_fingertip((*r.goal)[0], (*r.goal)[1]).norm();
    REQUIRE(radius >= 0.05 - 1e-12);
    REQUIRE(radius <= 0.20 + 1e-12);
    REQUIRE(std::abs(r.x0[1]) <= reach.params().reacher.wrist_limit);

    Rng r3 = make_rng(seed);
    const auto d = drive.sample_instance(r3);
    REQUIRE(d.reference.has_value());
    REQUIRE(d.reference->rows() == drive.horizon());
    REQUIRE(d.x0.allFinite());
  }
}

TEST_CASE("sampling is deterministic per seed") {
  for (EnvId id : kAll) {
    const Environment env(default_params(id));
    Rng a = make_rng(99), b = make_rng(99);
    const auto p = env.sample_instance(a);
    const auto q = env.sample_instance(b);
    CHECK(p.x0 == q.x0);
    CHECK(p.seed == q.seed);
    if (p.goal) CHECK(*p.goal == *q.goal);
    if (p.reference) CHECK(*p.reference == *q.reference);
  }
}

TEST_CASE("driving scenario windows slide along the route") {
  const Environment env(default_params(EnvId::driving));
  Rng rng = make_rng(4);
  const Scenario sc = sample_scenario(env, rng);
  const auto a = sc.instance_at(env, 0, sc.x0, 0);
  const auto b = sc.instance_at(env, 1, sc.x0, 1);
  CHECK(a.reference->bottomRows(env.horizon() - 1) == b.reference->topRows(env.horizon() - 1));
  CHECK_THROWS_AS(sc.instance_at(env, env.params().episode_length + 1, sc.x0, 0), DimensionError);
}

TEST_CASE("controls are clamped inside the dynamics") {
  const Environment env(default_params(EnvId::cartpole));
  const State x = State::Zero(4);
  Control big(1), edge(1);
  big << 100.0;
  edge << 5.5;
  CHECK(env.step(x, big) == env.step(x, edge));
  const auto lin = env.jacobians(x, big);
  CHECK(lin.B.isZero(0.0));
}

TEST_CASE("environment config overrides defaults") {
  const nlohmann::json j = {{"env", "cartpole"}, {"m_c", 2.0}, {"H", 12}, {"R", {0.5}}};
  const EnvParams p = env_params_from_json(j);
  CHECK(p.cartpole.m_c == 2.0);
  CHECK(p.horizon == 12);
  CHECK(p.R[0] == 0.5);
  CHECK(p.cartpole.m_p == 0.3);
  CHECK_THROWS_AS(env_params_from_json(nlohmann::json{{"env", "cartpole"}, {"dt", -1.0}}), ConfigError);
  CHECK_THROWS_AS(env_params_from_json(nlohmann::json{{"env", "nope"}}), ConfigError);
  const EnvParams back = env_params_from_json(env_params_to_json(p));
  CHECK(back.cartpole.m_c == 2.0);
  CHECK(back.Q == p.Q);
}

TEST_CASE("invalid instances are rejected") {
  const Environment env(default_params(EnvId::driving));
  ProblemInstance psi;
  psi.env_id = EnvId::driving;
  psi.x0 = State::Zero(5);
  CHECK_THROWS(env.validate_instance(psi));
  psi.reference = Matrix::Zero(3, 5);
  CHECK_THROWS(env.validate_instance(psi));
}
