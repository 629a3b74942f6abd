#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/core/rollout.hpp"
#include "miso/init/strategy.hpp"
#include "miso/net/features.hpp"
#include "miso/optim/optimizers.hpp"

using namespace miso;

namespace {

ModelParams untrained(const Environment& env, int K, LossKind kind, std::uint64_t seed) {
  Architecture arch;
  arch.feature_dim = feature_shape(env).size();
  arch.hidden = {16, 16};
  arch.embed = 8;
  arch.heads = K;
  arch.horizon = env.horizon();
  arch.control_dim = env.control_dim();
  auto m = make_model(arch, env.id(), kind, env.u_min(), env.u_max(), seed);
  // Spread the heads so candidates differ noticeably.
  m.out_std.setConstant(0.5 * (env.u_max() - env.u_min()).maxCoeff());
  return m;
}

RunContext context(const Environment& env, std::uint64_t seed, bool with_previous) {
  RunContext ctx;
  ctx.env = &env;
  Rng rng = make_rng(seed);
  ctx.psi = env.sample_instance(rng);
  ctx.online = online_profile(env.id());
  ctx.oracle = oracle_profile(env.id());
  ctx.seed = seed;
  if (with_previous) {
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    Matrix c(env.horizon(), env.control_dim());
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng) * env.u_max()[i / c.rows()];
    ctx.previous = ControlSequence(c);
  }
  return ctx;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

StrategyConfig cfg_of(StrategyKind kind, int K, bool include_default = false) {
  StrategyConfig c;
  c.kind = kind;
  c.K = K;
  c.include_default = include_default;
  return c;
}

Strategy miso_strategy(const Environment& env, int K, bool include_default, std::uint64_t seed = 11) {
  return Strategy(cfg_of(StrategyKind::miso_wta, K, include_default), env,
                  {untrained(env, K, LossKind::wta, seed)});
}

}  // namespace

TEST_CASE("warm start candidate is the shifted previous solution") {
  const auto env = Environment::make(EnvId::cartpole);
  auto ctx = context(env, 1, true);
  const Strategy s(cfg_of(StrategyKind::warm_start, 1), env);
  const auto set = propose(s, ctx);
  REQUIRE(set.size() == 1);
  CHECK(set.labels[0] == "warm_start");
  CHECK(same_bits(set.candidates[0].controls, warm_start_shift(*ctx.previous).controls));

  ctx.previous.reset();
  const auto first = propose(s, ctx);
  CHECK(first.candidates[0].controls.isZero(0.0));
}

TEST_CASE("zero noise perturbation replicates the base candidate") {
  for (EnvId id : {EnvId::toy1d, EnvId::cartpole, EnvId::driving}) {
    const auto env = Environment::make(id);
    const auto ctx = context(env, 2, true);
    auto c = cfg_of(StrategyKind::warm_start_perturb, 32);
    c.perturb_sigma = Vector::Zero(env.control_dim());
    const auto set = propose(Strategy(c, env), ctx);
    REQUIRE(set.size() == 32);
    const auto base = propose(Strategy(cfg_of(StrategyKind::warm_start, 1), env), ctx);
    for (const auto& cand : set.candidates) CHECK(same_bits(cand.controls, base.candidates[0].controls));

    const auto model = untrained(env, 1, LossKind::regression, 3);
    auto rc = cfg_of(StrategyKind::regression_perturb, 5);
    rc.perturb_sigma = Vector::Zero(env.control_dim());
    const auto rset = propose(Strategy(rc, env, {model}), ctx);
    const auto rbase = propose(Strategy(cfg_of(StrategyKind::regression, 1), env, {model}), ctx);
    REQUIRE(rset.size() == 5);
    for (const auto& cand : rset.candidates) CHECK(same_bits(cand.controls, rbase.candidates[0].controls));
  }
}

TEST_CASE("perturbed candidates stay inside the bounds") {
  const auto env = Environment::make(EnvId::reacher);
  const auto ctx = context(env, 3, true);
  auto c = cfg_of(StrategyKind::warm_start_perturb, 64);
  c.perturb_sigma = Vector::Constant(env.control_dim(), 10.0);
  for (const auto& cand : propose(Strategy(c, env), ctx).candidates) {
    for (int j = 0; j < env.control_dim(); ++j) {
      CHECK(cand.controls.col(j).minCoeff() >= env.u_min()[j]);
      CHECK(cand.controls.col(j).maxCoeff() <= env.u_max()[j]);
    }
  }
}

TEST_CASE("include_default appends the warm start last") {
  const auto env = Environment::make(EnvId::cartpole);
  const auto ctx = context(env, 4, true);
  const auto set = propose(miso_strategy(env, 32, true), ctx);
  REQUIRE(set.size() == 33);
  CHECK(set.labels.back() == "warm_start");
  CHECK(set.labels.front() == "miso_head_0");
  CHECK(same_bits(set.candidates.back().controls, warm_start_shift(*ctx.previous).controls));
}

TEST_CASE("model checks reject mismatched checkpoints") {
  const auto cart = Environment::make(EnvId::cartpole);
  const auto reach = Environment::make(EnvId::reacher);
  CHECK_THROWS_AS(Strategy(cfg_of(StrategyKind::miso_wta, 4), cart, {untrained(reach, 4, LossKind::wta, 1)}),
                  EnvMismatchError);
  CHECK_THROWS(Strategy(cfg_of(StrategyKind::miso_wta, 8), cart, {untrained(cart, 4, LossKind::wta, 1)}));
  CHECK_THROWS(Strategy(cfg_of(StrategyKind::ensemble, 3), cart,
                        {untrained(cart, 1, LossKind::regression, 1), untrained(cart, 1, LossKind::regression, 2)}));
  StrategyConfig bad = cfg_of(StrategyKind::miso_wta, 0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("ensemble proposals are deterministic") {
  const auto env = Environment::make(EnvId::driving);
  std::vector<ModelParams> members;
  for (int i = 0; i < 4; ++i) members.push_back(untrained(env, 1, LossKind::regression, 100 + i));
  const Strategy s(cfg_of(StrategyKind::ensemble, 4), env, members);
  const auto ctx = context(env, 5, true);
  const auto a = propose(s, ctx);
  const auto b = propose(s, ctx);
  REQUIRE(a.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(same_bits(a.candidates[k].controls, b.candidates[k].controls));
  CHECK(!same_bits(a.candidates[0].controls, a.candidates[1].controls));
}

TEST_CASE("select takes the lowest cost with lowest-index ties") {
  const auto env = Environment::make(EnvId::toy1d);
  const auto ctx = context(env, 6, false);
  CandidateSet set;
  for (int i = 0; i < 3; ++i) set.push_back(ControlSequence::zeros(5, 1), "c" + std::to_string(i));
  const std::vector<double> scores = {5, 2, 7};
  int calls = 0;
  auto by_order = [&](const Environment&, const ProblemInstance&, const ControlSequence&) {
    return scores[static_cast<std::size_t>(calls++)];
  };
  const auto s = select(set, ctx.psi, env, Exec::serial, by_order);
  CHECK(s.index == 1);
  CHECK(s.costs == scores);

  const auto tie = select(set, ctx.psi, env, Exec::serial);
  CHECK(tie.index == 0);

  CandidateSet one;
  one.push_back(ControlSequence::zeros(5, 1), "only");
  CHECK(select(one, ctx.psi, env).index == 0);

  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> bad = {nan, inf, 3.0};
  calls = 0;
  auto bad_fn = [&](const Environment&, const ProblemInstance&, const ControlSequence&) {
    return bad[static_cast<std::size_t>(calls++)];
  };
  const auto b = select(set, ctx.psi, env, Exec::serial, bad_fn);
  CHECK(b.index == 2);
  CHECK(b.costs[0] == inf);

  auto all_inf = [&](const Environment&, const ProblemInstance&, const ControlSequence&) { return inf; };
  CHECK(select(set, ctx.psi, env, Exec::serial, all_inf).index == 0);
}

TEST_CASE("divergent candidates are never selected") {
  const auto env = Environment::make(EnvId::cartpole);
  auto ctx = context(env, 7, false);
  const auto set = propose(miso_strategy(env, 4, true), ctx);
  auto psi = ctx.psi;
  psi.x0[3] = 1e300;
  const auto s = select(set, psi, env);
  for (double c : s.costs) CHECK(c == std::numeric_limits<double>::infinity());
  CHECK(s.index == 0);
}

TEST_CASE("warm start strategy reproduces the plain warm start pipeline") {
  for (EnvId id : {EnvId::toy1d, EnvId::cartpole, EnvId::reacher, EnvId::driving}) {
    const auto env = Environment::make(id);
    const auto ctx = context(env, 8, true);
    const auto run = run_single_optimizer(Strategy(cfg_of(StrategyKind::warm_start, 1), env), ctx);
    const EnvProblem problem(env, ctx.psi);
    const auto plain = solve(problem, env.clamp(warm_start_shift(*ctx.previous)), ctx.online, derive_seed(ctx.seed, 0));
    CHECK(same_bits(run.solution.trajectory.cost, plain.trajectory.cost));
    CHECK(same_bits(run.solution.trajectory.controls, plain.trajectory.controls));
  }
}

TEST_CASE("never worse than the default on every instance") {
  for (EnvId id : {EnvId::toy1d, EnvId::cartpole, EnvId::reacher, EnvId::driving}) {
    const auto env = Environment::make(id);
    const Strategy miso = miso_strategy(env, 8, true);
    const Strategy ws(cfg_of(StrategyKind::warm_start, 1), env);
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto ctx = context(env, 1000 + seed, seed % 2 == 0);
      const auto single = run_single_optimizer(miso, ctx);
      if (!(single.init_costs[static_cast<std::size_t>(single.selected)] <= single.init_costs.back())) ++violations;
      const auto multi = run_multiple_optimizers(miso, ctx);
      const auto baseline = run_single_optimizer(ws, ctx);
      if (!(multi.solution.trajectory.cost <= baseline.solution.trajectory.cost)) ++violations;
      if (!(multi.solution.trajectory.cost <= multi.final_costs.back())) ++violations;
    }
    INFO("env " << to_string(id));
    CHECK(violations == 0);
  }
}

TEST_CASE("multiple optimizers are bit identical serially and in parallel") {
  for (EnvId id : {EnvId::cartpole, EnvId::driving}) {
    const auto env = Environment::make(id);
    const Strategy miso = miso_strategy(env, 8, true);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto ctx = context(env, 2000 + seed, true);
      const auto a = run_multiple_optimizers(miso, ctx, Exec::serial);
      const auto b = run_multiple_optimizers(miso, ctx, Exec::parallel);
      CHECK(a.selected == b.selected);
      CHECK(same_bits(a.solution.trajectory.controls, b.solution.trajectory.controls));
      REQUIRE(a.final_costs.size() == b.final_costs.size());
      for (std::size_t i = 0; i < a.final_costs.size(); ++i) CHECK(same_bits(a.final_costs[i], b.final_costs[i]));
    }
  }
}

TEST_CASE("one candidate makes both execution modes agree") {
  const auto env = Environment::make(EnvId::cartpole);
  const Strategy miso = miso_strategy(env, 1, false);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ctx = context(env, 3000 + seed, true);
    const auto a = run_single_optimizer(miso, ctx);
    const auto b = run_multiple_optimizers(miso, ctx);
    CHECK(same_bits(a.solution.trajectory.controls, b.solution.trajectory.controls));
  }
}

TEST_CASE("best of the first j candidates never gets worse") {
  const auto env = Environment::make(EnvId::cartpole);
  const Strategy miso = miso_strategy(env, 16, false);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ctx = context(env, 4000 + seed, true);
    const auto run = run_multiple_optimizers(miso, ctx);
    double best = std::numeric_limits<double>::infinity();
    double prev = best;
    for (double c : run.final_costs) {
      best = std::min(best, c);
      CHECK(best <= prev);
      prev = best;
    }
    CHECK(run.solution.trajectory.cost == best);
  }
}

TEST_CASE("runs are deterministic per seed") {
  const auto env = Environment::make(EnvId::driving);
  auto c = cfg_of(StrategyKind::warm_start_perturb, 6, true);
  const Strategy s(c, env);
  const auto ctx = context(env, 5000, true);
  const auto a = run_single_optimizer(s, ctx);
  const auto b = run_single_optimizer(s, ctx);
  CHECK(same_bits(a.solution.trajectory.controls, b.solution.trajectory.controls));
  auto other = ctx;
  other.seed = 5001;
  const auto d = propose(s, other);
  const auto e = propose(s, ctx);
  CHECK(!same_bits(d.candidates[0].controls, e.candidates[0].controls));
}

TEST_CASE("strategy config json round trip") {
  StrategyConfig c = cfg_of(StrategyKind::miso_mix, 8, true);
  c.model_paths = {"a.bin"};
  c.seed = 42;
  const auto back = strategy_config_from_json(to_json(c));
  CHECK(back.kind == StrategyKind::miso_mix);
  CHECK(back.K == 8);
  CHECK(back.include_default);
  CHECK(back.model_paths == c.model_paths);
  CHECK(back.seed == 42);
  CHECK_THROWS_AS(strategy_kind_from_string("bogus"), ConfigError);
}
