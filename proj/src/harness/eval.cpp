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

#include "miso/harness/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/envs/scenario.hpp"
#include "miso/harness/data.hpp"

namespace miso {

std::string_view to_string(EvalMode m) { return m == EvalMode::one_off ? "one_off" : "sequential"; }

EvalMode eval_mode_from_string(std::string_view s) {
  if (s == "one_off" || s == "one-off") return EvalMode::one_off;
  if (s == "sequential") return EvalMode::sequential;
  throw ConfigError("unknown eval mode '" + std::string(s) + "'");
}

std::string_view to_string(Execution e) { return e == Execution::single ? "single" : "multiple"; }

Execution execution_from_string(std::string_view s) {
  if (s == "single") return Execution::single;
  if (s == "multiple") return Execution::multiple;
  throw ConfigError("unknown execution '" + std::string(s) + "'");
}

void EvalConfig::validate() const {
  if (instances < 1) throw ConfigError("eval: instances must be >= 1");
  if (episodes < 1) throw ConfigError("eval: episodes must be >= 1");
  if (episode_length < 0) throw ConfigError("eval: episode_length must be >= 0");
  if (divergence_penalty < 0.0) throw ConfigError("eval: divergence_penalty must be >= 0");
  online.validate();
  oracle.validate();
}

EvalConfig default_eval_config(EnvId env) {
  EvalConfig c;
  c.online = online_profile(env);
  c.oracle = oracle_profile(env);
  return c;
}

EvalConfig eval_config_from_json(const nlohmann::json& j, EnvId env) {
  EvalConfig c = default_eval_config(env);
  try {
    if (j.contains("mode")) c.mode = eval_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("execution")) c.execution = execution_from_string(j.at("execution").get<std::string>());
    c.instances = j.value("instances", c.instances);
    c.episodes = j.value("episodes", c.episodes);
    c.episode_length = j.value("T_env", c.episode_length);
    c.seed = j.value("seed", c.seed);
    c.divergence_penalty = j.value("divergence_penalty", c.divergence_penalty);
    if (j.contains("online")) c.online = optimizer_config_from_json(j.at("online"));
    if (j.contains("oracle")) c.oracle = optimizer_config_from_json(j.at("oracle"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("eval config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const EvalConfig& c) {
  return {{"mode", std::string(to_string(c.mode))},
          {"execution", std::string(to_string(c.execution))},
          {"instances", c.instances},
          {"episodes", c.episodes},
          {"T_env", c.episode_length},
          {"seed", c.seed},
          {"divergence_penalty", c.divergence_penalty},
          {"online", to_json(c.online)},
          {"oracle", to_json(c.oracle)}};
}

void EvalReport::finalize() {
  std::sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) { return a.instance_id < b.instance_id; });
  const double n = static_cast<double>(rows.size());
  double sum = 0.0;
  for (const auto& r : rows) sum += r.cost;
  mean_cost = rows.empty() ? 0.0 : sum / n;
  double ss = 0.0;
  for (const auto& r : rows) ss += (r.cost - mean_cost) * (r.cost - mean_cost);
  std_error = rows.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;

  std::size_t width = 1;
  for (const auto& r : rows) width = std::max(width, r.init_costs.size());
  std::vector<double> counts(width, 0.0);
  double total = 0.0;
  guarantee_violations = monotone_violations = feasibility_violations = diverged = 0;
  for (const auto& r : rows) {
    for (int s : r.selections) {
      if (static_cast<std::size_t>(s) >= counts.size()) counts.resize(static_cast<std::size_t>(s) + 1, 0.0);
      counts[static_cast<std::size_t>(s)] += 1.0;
      total += 1.0;
    }
    guarantee_violations += r.guarantee_ok ? 0 : 1;
    monotone_violations += r.monotone_violations;
    feasibility_violations += r.feasibility_violations;
    diverged += r.diverged ? 1 : 0;
  }
  argmin_frequency = counts;
  if (total > 0.0)
    for (double& f : argmin_frequency) f /= total;
}

namespace {

bool guarantee_holds(const StrategyRun& run, Execution ex, bool include_default) {
  if (!include_default) return true;
  if (ex == Execution::single)
    return run.init_costs[static_cast<std::size_t>(run.selected)] <= run.init_costs.back();
  // The last slot is the default candidate solved exactly as in the warm-start pipeline.
  return run.solution.trajectory.cost <= run.final_costs.back();
}

StrategyRun run(const Strategy& s, const RunContext& ctx, Execution ex) {
  return ex == Execution::single ? run_single_optimizer(s, ctx, Exec::serial)
                                 : run_multiple_optimizers(s, ctx, Exec::serial);
}

RunContext base_context(const Environment& env, const EvalConfig& cfg) {
  RunContext ctx;
  ctx.env = &env;
  ctx.online = cfg.online;
  ctx.oracle = cfg.oracle;
  return ctx;
}

// Held-out stream: evaluation episodes never share seeds with data generation.
std::uint64_t eval_stream(std::uint64_t seed) { return derive_seed(seed, 0xe7a1); }

std::vector<WarmStartStep> one_off_instances(const Environment& env, const EvalConfig& cfg, Exec exec) {
  const int T = cfg.episode_length > 0 ? cfg.episode_length : default_episode_length(env);
  const int episodes = (cfg.instances + T - 1) / T;
  std::vector<std::vector<WarmStartStep>> eps(static_cast<std::size_t>(episodes));
  for_each_index(exec, eps.size(), [&](std::size_t e) {
    eps[e] = warm_start_episode(env, cfg.online, eval_stream(cfg.seed), static_cast<int>(e), T);
  });
  std::vector<WarmStartStep> out;
  for (auto& ep : eps)
    for (auto& s : ep)
      if (static_cast<int>(out.size()) < cfg.instances) out.push_back(std::move(s));
  return out;
}

EvalRow one_off_row(const Environment& env, const EvalConfig& cfg, const Strategy& s, const WarmStartStep& inst) {
  RunContext ctx = base_context(env, cfg);
  ctx.psi = inst.instance;
  ctx.previous = inst.previous;
  ctx.seed = inst.instance.seed;
  const StrategyRun r = run(s, ctx, cfg.execution);
  EvalRow row;
  row.instance_id = inst.instance.instance_id;
  row.final_state = inst.instance.x0;
  row.cost = r.solution.trajectory.cost;
  row.selected_index = r.selected;
  row.selections = {r.selected};
  row.init_costs = r.init_costs;
  row.guarantee_ok = guarantee_holds(r, cfg.execution, s.config().include_default);
  row.monotone_violations = r.monotone_violations;
  row.feasibility_violations = r.feasibility_violations;
  row.solve_time_ms = r.total_ms;
  return row;
}

EvalRow episode_row(const Environment& env, const EvalConfig& cfg, const Strategy& s, int e, double penalty) {
  const std::uint64_t es = episode_seed(eval_stream(cfg.seed), e);
  Rng rng = make_rng(es);
  const Scenario sc = sample_scenario(env, rng);
  const int T = cfg.episode_length > 0 ? cfg.episode_length : env.params().episode_length;
  EvalRow row;
  row.instance_id = static_cast<std::uint32_t>(e);
  row.steps = 0;
  RunContext ctx = base_context(env, cfg);
  State x = sc.x0;
  double total = 0.0;
  for (int k = 0; k < T; ++k) {
    ctx.psi = sc.instance_at(env, k, x, static_cast<std::uint32_t>(e * T + k));
    ctx.psi.seed = derive_seed(es, static_cast<std::uint64_t>(k) + 1);
    ctx.seed = ctx.psi.seed;
    const StrategyRun r = run(s, ctx, cfg.execution);
    if (k == 0) {
      row.selected_index = r.selected;
      row.init_costs = r.init_costs;
    }
    row.selections.push_back(r.selected);
    row.guarantee_ok = row.guarantee_ok && guarantee_holds(r, cfg.execution, s.config().include_default);
    row.monotone_violations += r.monotone_violations;
    row.feasibility_violations += r.feasibility_violations;
    row.solve_time_ms += r.total_ms;
    const Control u0 = r.solution.trajectory.controls.row(0).transpose();
    total += env.stage_cost(0, x, u0, ctx.psi);
    ++row.steps;
    const State next = env.step(x, u0);
    if (!next.allFinite() || !std::isfinite(total)) {
      row.diverged = true;
      if (!std::isfinite(total)) total = 0.0;
      total += penalty;
      break;
    }
    x = next;
    ctx.previous = ControlSequence(r.solution.trajectory.controls);
  }
  row.final_state = x;
  row.cost = total / static_cast<double>(row.steps);
  return row;
}

}  // namespace

std::vector<EvalReport> evaluate(const Environment& env, const EvalConfig& cfg,
                                 const std::vector<NamedStrategy>& strategies, Exec exec) {
  cfg.validate();
  const double penalty = cfg.divergence_penalty > 0.0 ? cfg.divergence_penalty : env.params().divergence_penalty;
  std::vector<WarmStartStep> instances;
  if (cfg.mode == EvalMode::one_off) instances = one_off_instances(env, cfg, exec);
  std::vector<EvalReport> reports;
  for (const auto& ns : strategies) {
    EvalReport rep;
    rep.mode = cfg.mode;
    rep.execution = cfg.execution;
    rep.env_id = env.id();
    rep.strategy = ns.name;
    rep.strategy_config = ns.strategy.config();
    rep.config = to_json(cfg);
    const std::size_t n = cfg.mode == EvalMode::one_off ? instances.size() : static_cast<std::size_t>(cfg.episodes);
    rep.rows.resize(n);
    for_each_index(exec, n, [&](std::size_t i) {
      rep.rows[i] = cfg.mode == EvalMode::one_off ? one_off_row(env, cfg, ns.strategy, instances[i])
                                                  : episode_row(env, cfg, ns.strategy, static_cast<int>(i), penalty);
    });
    rep.finalize();
    reports.push_back(std::move(rep));
  }
  return reports;
}

nlohmann::json summary_json(const EvalReport& r) {
  const char* formula = r.mode == EvalMode::one_off
                            ? "J = sum_t stage_cost(x_t, u_t) + terminal_cost(x_H) of the optimizer output"
                            : "mean over executed steps of stage_cost(x_k, u_k); divergence adds the penalty";
  return {{"type", "summary"},
          {"env", std::string(to_string(r.env_id))},
          {"mode", std::string(to_string(r.mode))},
          {"execution", std::string(to_string(r.execution))},
          {"strategy", r.strategy},
          {"kind", std::string(to_string(r.strategy_config.kind))},
          {"K", r.strategy_config.K},
          {"include_default", r.strategy_config.include_default},
          {"count", r.rows.size()},
          {"mean_cost", r.mean_cost},
          {"std_error", r.std_error},
          {"argmin_frequency", r.argmin_frequency},
          {"guarantee_violations", r.guarantee_violations},
          {"monotone_violations", r.monotone_violations},
          {"feasibility_violations", r.feasibility_violations},
          {"diverged", r.diverged},
          {"cost_formula", formula},
          {"strategy_config", to_json(r.strategy_config)},
          {"config", r.config}};
}

nlohmann::json row_json(const EvalReport& r, const EvalRow& row) {
  nlohmann::json init = nlohmann::json::array();
  for (double c : row.init_costs) init.push_back(std::isfinite(c) ? nlohmann::json(c) : nlohmann::json(nullptr));
  return {{"type", "row"},
          {"strategy", r.strategy},
          {"kind", std::string(to_string(r.strategy_config.kind))},
          {"K", r.strategy_config.K},
          {"include_default", r.strategy_config.include_default},
          {"instance_id", row.instance_id},
          {"cost", row.cost},
          {"selected_index", row.selected_index},
          {"selections", row.selections},
          {"init_costs", init},
          {"guarantee_ok", row.guarantee_ok},
          {"diverged", row.diverged},
          {"steps", row.steps},
          {"final_state", std::vector<double>(row.final_state.data(), row.final_state.data() + row.final_state.size())}};
}

std::string report_jsonl(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << summary_json(r).dump() << "\n";
    for (const auto& row : r.rows) out << row_json(r, row).dump() << "\n";
  }
  return out.str();
}

std::string report_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out.precision(17);
  out << "strategy,kind,K,include_default,mode,execution,count,mean_cost,std_error,guarantee_violations,diverged\n";
  for (const auto& r : reports)
    out << r.strategy << "," << to_string(r.strategy_config.kind) << "," << r.strategy_config.K << ","
        << (r.strategy_config.include_default ? 1 : 0) << "," << to_string(r.mode) << "," << to_string(r.execution)
        << "," << r.rows.size() << "," << r.mean_cost << "," << r.std_error << "," << r.guarantee_violations << ","
        << r.diverged << "\n";
  return out.str();
}

nlohmann::json report_timing(const std::vector<EvalReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) {
    double sum = 0.0;
    for (const auto& row : r.rows) sum += row.solve_time_ms;
    j.push_back({{"strategy", r.strategy},
                 {"mean_solve_time_ms", r.rows.empty() ? 0.0 : sum / static_cast<double>(r.rows.size())}});
  }
  return j;
}

void write_reports(const std::string& path, const std::vector<EvalReport>& reports) {
  auto write = [](const std::string& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p);
    out << text;
  };
  write(path, report_jsonl(reports));
  write(path + ".csv", report_csv(reports));
  write(path + ".timing.json", report_timing(reports).dump(2) + "\n");
}

}  // namespace miso
