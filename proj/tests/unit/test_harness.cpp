#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/harness/bench.hpp"
#include "miso/harness/data.hpp"
#include "miso/harness/eval.hpp"
#include "miso/harness/train.hpp"
#include "miso/net/checkpoint.hpp"
#include "miso/optim/optimizers.hpp"

using namespace miso;

namespace {

StrategyConfig cfg_of(StrategyKind kind, int K = 1, bool include_default = false) {
  StrategyConfig c;
  c.kind = kind;
  c.K = K;
  c.include_default = include_default;
  return c;
}

GeneratedData toy_data(int episodes, std::uint64_t seed) {
  GenDataConfig gc = default_gen_data_config(EnvId::toy1d);
  gc.episodes = episodes;
  gc.seed = seed;
  return gen_data(Environment::make(EnvId::toy1d), gc);
}

TrainConfig small_train(LossKind kind, int K, int epochs) {
  TrainConfig tc = default_train_config(EnvId::toy1d, kind, K);
  tc.hidden = {16, 16};
  tc.embed = 8;
  tc.epochs = epochs;
  tc.batch_size = 64;
  tc.seed = 11;
  return tc;
}

// Exact dynamic programming over the 0.05 grid shared by states and controls.
// Returns the final state of the cheapest 5-step path from x0.
double grid_oracle_final_state(double x0) {
  const double step = 0.05;
  const int half = 100;  // states in [-5, 5]
  const int n = 2 * half + 1;
  const int H = 5;
  auto state = [&](int i) { return x0 + (i - half) * step; };
  std::vector<double> V(n, 0.0), next(n);
  std::vector<std::vector<int>> arg(H, std::vector<int>(n, 0));
  for (int t = H - 1; t >= 0; --t) {
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int du = -20; du <= 20; ++du) {
        const int j = i + du;
        if (j < 0 || j >= n) continue;
        const double c = toy_cost(state(j)) + V[j];
        if (c < best) {
          best = c;
          arg[t][i] = j;
        }
      }
      next[i] = best;
    }
    V = next;
  }
  int i = half;
  for (int t = 0; t < H; ++t) i = arg[t][i];
  return state(i);
}

}  // namespace

TEST_CASE("gen_data writes one record per executed step") {
  const auto toy = toy_data(100, 3);
  CHECK(toy.records.size() == 100);
  CHECK(toy.summary.records == 100);
  CHECK(toy.summary.oracle_improved_fraction >= 0.0);
  CHECK(toy.summary.oracle_improved_fraction <= 1.0);

  const Environment cart = Environment::make(EnvId::cartpole);
  GenDataConfig gc = default_gen_data_config(EnvId::cartpole);
  gc.episodes = 10;
  gc.seed = 5;
  const auto data = gen_data(cart, gc);
  CHECK(data.records.size() == 500);
  CHECK(data.summary.oracle_improved_fraction >= 0.0);
  CHECK(data.summary.oracle_improved_fraction <= 1.0);
  CHECK(data.summary.divergence_penalty == doctest::Approx(10.0 * data.summary.stage_cost_p99));
  for (std::size_t i = 0; i < data.records.size(); ++i) CHECK(data.records[i].instance.instance_id == i);
  for (const auto& r : data.records) CHECK(std::isfinite(r.oracle_cost));
}

TEST_CASE("toy labels sit at both optima") {
  const Environment env = Environment::make(EnvId::toy1d);
  const auto data = toy_data(20, 9);
  for (const auto& r : data.records) {
    double x = r.instance.x0[0];
    for (Eigen::Index t = 0; t < r.oracle_controls.controls.rows(); ++t) x += r.oracle_controls.controls(t, 0);
    const double target = r.instance.instance_id % 2 == 0 ? -1.5 : 2.0;
    CHECK(std::abs(x - target) <= 0.05);
  }
}

TEST_CASE("regression training forces a single head") {
  CHECK(default_train_config(EnvId::cartpole, LossKind::regression, 8).K == 1);
  nlohmann::json j = {{"loss", "regression"}, {"K", 4}};
  CHECK(train_config_from_json(j, EnvId::toy1d).K == 1);
  const auto data = toy_data(40, 1);
  const auto res = train(Environment::make(EnvId::toy1d), data.records, small_train(LossKind::regression, 4, 2));
  CHECK(res.best.K() == 1);
}

TEST_CASE("training is deterministic and thread independent") {
  const Environment env = Environment::make(EnvId::toy1d);
  const auto data = toy_data(200, 4);
  const auto tc = small_train(LossKind::wta, 2, 4);
  const auto a = train(env, data.records, tc, Exec::parallel);
  const auto b = train(env, data.records, tc, Exec::parallel);
  const auto c = train(env, data.records, tc, Exec::serial);
  CHECK(checkpoint_encode(a.best) == checkpoint_encode(b.best));
  CHECK(checkpoint_encode(a.best) == checkpoint_encode(c.best));
  CHECK(a.train_count + a.val_count == data.records.size());
  CHECK(a.log.size() == 5);
}

TEST_CASE("training rejects an empty dataset") {
  CHECK_THROWS_AS(train(Environment::make(EnvId::toy1d), {}, small_train(LossKind::wta, 2, 1)), Error);
}

TEST_CASE("toy WTA smoke training lowers the validation loss tenfold") {
  const Environment env = Environment::make(EnvId::toy1d);
  const auto data = toy_data(2000, 7);
  TrainConfig tc = default_train_config(EnvId::toy1d, LossKind::wta, 2);
  tc.hidden = {64, 64};
  tc.embed = 32;
  tc.epochs = 100;
  tc.batch_size = 256;
  tc.seed = 4;
  const auto res = train(env, data.records, tc);
  const double ratio = res.log.front().val_loss / res.log[static_cast<std::size_t>(res.best_epoch)].val_loss;
  MESSAGE("epoch-0 / best validation loss ratio: " << ratio);
  CHECK(ratio >= 10.0);
}

TEST_CASE("strategies see identical instances") {
  const Environment env = Environment::make(EnvId::cartpole);
  EvalConfig ec = default_eval_config(EnvId::cartpole);
  ec.instances = 30;
  const auto reps = evaluate(env, ec,
                             {{"warm", Strategy(cfg_of(StrategyKind::warm_start), env)},
                              {"perturb", Strategy(cfg_of(StrategyKind::warm_start_perturb, 4, true), env)}});
  REQUIRE(reps.size() == 2);
  REQUIRE(reps[0].rows.size() == 30);
  REQUIRE(reps[1].rows.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(reps[0].rows[i].instance_id == reps[1].rows[i].instance_id);
    // The appended default is the warm start itself.
    CHECK(reps[0].rows[i].init_costs[0] == reps[1].rows[i].init_costs.back());
  }
  CHECK(reps[1].guarantee_violations == 0);
}

TEST_CASE("oracle proxy is no worse than warm start on cartpole") {
  const Environment env = Environment::make(EnvId::cartpole);
  EvalConfig ec = default_eval_config(EnvId::cartpole);
  ec.instances = 200;
  const auto reps = evaluate(env, ec,
                             {{"warm", Strategy(cfg_of(StrategyKind::warm_start), env)},
                              {"oracle", Strategy(cfg_of(StrategyKind::oracle_proxy), env)}});
  MESSAGE("warm " << reps[0].mean_cost << " oracle " << reps[1].mean_cost);
  CHECK(reps[1].mean_cost <= reps[0].mean_cost);
  CHECK(reps[0].argmin_frequency == std::vector<double>{1.0});
  CHECK(reps[1].argmin_frequency == std::vector<double>{1.0});
}

TEST_CASE("sequential oracle on the toy task settles at an optimum") {
  const Environment env = Environment::make(EnvId::toy1d);
  const double grid_final = grid_oracle_final_state(0.0);
  CHECK(std::abs(grid_final + 1.5) <= 0.05);

  EvalConfig ec = default_eval_config(EnvId::toy1d);
  ec.mode = EvalMode::sequential;
  ec.episodes = 4;
  ec.episode_length = env.horizon();
  const auto reps = evaluate(env, ec, {{"oracle", Strategy(cfg_of(StrategyKind::oracle_proxy), env)}});
  for (const auto& row : reps[0].rows) {
    const double x = row.final_state[0];
    CHECK(std::min(std::abs(x + 1.5), std::abs(x - 2.0)) <= 0.05);
    CHECK(std::abs(x - grid_final) <= 0.05);
  }
}

TEST_CASE("zero-cost environment reports zero for every strategy") {
  EnvParams p = default_params(EnvId::cartpole);
  p.Q.setZero();
  p.R.setZero();
  p.Q_terminal.setZero();
  const Environment env(p);
  for (EvalMode mode : {EvalMode::one_off, EvalMode::sequential}) {
    EvalConfig ec = default_eval_config(EnvId::cartpole);
    ec.mode = mode;
    ec.instances = 10;
    ec.episodes = 2;
    ec.episode_length = 5;
    const auto reps = evaluate(env, ec,
                               {{"warm", Strategy(cfg_of(StrategyKind::warm_start), env)},
                                {"perturb", Strategy(cfg_of(StrategyKind::warm_start_perturb, 3), env)}});
    for (const auto& r : reps) CHECK(r.mean_cost == 0.0);
  }
}

TEST_CASE("reports do not depend on the thread count") {
  const Environment env = Environment::make(EnvId::cartpole);
  EvalConfig ec = default_eval_config(EnvId::cartpole);
  ec.mode = EvalMode::sequential;
  ec.episodes = 4;
  ec.episode_length = 10;
  ec.execution = Execution::multiple;
  const std::vector<NamedStrategy> s = {{"perturb", Strategy(cfg_of(StrategyKind::warm_start_perturb, 4, true), env)}};
  const int saved = num_threads();
  set_num_threads(1);
  const std::string one = report_jsonl(evaluate(env, ec, s, Exec::parallel));
  set_num_threads(8);
  const std::string eight = report_jsonl(evaluate(env, ec, s, Exec::parallel));
  set_num_threads(saved);
  const std::string serial = report_jsonl(evaluate(env, ec, s, Exec::serial));
  CHECK(one == eight);
  CHECK(one == serial);
}

TEST_CASE("report aggregates match their rows") {
  const Environment env = Environment::make(EnvId::reacher);
  EvalConfig ec = default_eval_config(EnvId::reacher);
  ec.instances = 40;
  ec.execution = Execution::multiple;
  const auto reps = evaluate(env, ec, {{"perturb", Strategy(cfg_of(StrategyKind::warm_start_perturb, 4, true), env)}});
  const auto& r = reps[0];
  double sum = 0.0;
  for (const auto& row : r.rows) sum += row.cost;
  const double mean = sum / static_cast<double>(r.rows.size());
  CHECK(std::abs(mean - r.mean_cost) <= 1e-12);
  double ss = 0.0;
  for (const auto& row : r.rows) ss += (row.cost - mean) * (row.cost - mean);
  const double n = static_cast<double>(r.rows.size());
  CHECK(std::abs(std::sqrt(ss / (n - 1.0)) / std::sqrt(n) - r.std_error) <= 1e-12);
  CHECK(r.argmin_frequency.size() == 5);
  double total = 0.0;
  for (double f : r.argmin_frequency) {
    CHECK(f >= 0.0);
    total += f;
  }
  CHECK(std::abs(total - 1.0) <= 1e-9);
  for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i - 1].instance_id < r.rows[i].instance_id);

  // Rows written to JSON lines parse back to the same mean.
  const std::string text = report_jsonl(reps);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const double stored = nlohmann::json::parse(line).at("mean_cost").get<double>();
  double parsed = 0.0;
  while (std::getline(in, line)) parsed += nlohmann::json::parse(line).at("cost").get<double>();
  CHECK(stored == r.mean_cost);
  CHECK(std::abs(parsed / n - stored) <= 1e-12);
}

TEST_CASE("bench with a single K gives one row") {
  BenchConfig bc;
  bc.K = {1};
  bc.repetitions = 5;
  bc.warmup = 1;
  const auto rows = bench_inference(Environment::make(EnvId::cartpole), bc);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].K == 1);
  CHECK(rows[0].multi_mean_ms > 0.0);
}
