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

#include "miso/init/strategy.hpp"

#include <chrono>
#include <limits>

#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/core/rollout.hpp"
#include "miso/net/checkpoint.hpp"
#include "miso/net/features.hpp"
#include "miso/optim/optimizers.hpp"
#include "miso/optim/problem.hpp"
#include "miso/parallel/kernels.hpp"

namespace miso {

namespace {

constexpr StrategyKind kAllKinds[] = {
    StrategyKind::warm_start,         StrategyKind::oracle_proxy, StrategyKind::regression,
    StrategyKind::warm_start_perturb, StrategyKind::regression_perturb,
    StrategyKind::multi_output_regression, StrategyKind::ensemble, StrategyKind::miso_pd,
    StrategyKind::miso_wta,           StrategyKind::miso_mix,
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Falls back to zero controls when the warm start itself diverges.
Vector features_for(const Environment& env, const ProblemInstance& psi, const ControlSequence& ws) {
  try {
    return featurize(env, psi, ws);
  } catch (const DivergenceError&) {
    return featurize(env, psi, ControlSequence::zeros(env.horizon(), env.control_dim()));
  }
}

bool is_multi_head(StrategyKind k) {
  return k == StrategyKind::multi_output_regression || k == StrategyKind::miso_pd || k == StrategyKind::miso_wta ||
         k == StrategyKind::miso_mix;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::warm_start: return "warm_start";
    case StrategyKind::oracle_proxy: return "oracle_proxy";
    case StrategyKind::regression: return "regression";
    case StrategyKind::warm_start_perturb: return "warm_start_perturb";
    case StrategyKind::regression_perturb: return "regression_perturb";
    case StrategyKind::multi_output_regression: return "multi_output_regression";
    case StrategyKind::ensemble: return "ensemble";
    case StrategyKind::miso_pd: return "miso_pd";
    case StrategyKind::miso_wta: return "miso_wta";
    case StrategyKind::miso_mix: return "miso_mix";
  }
  return "unknown";
}

StrategyKind strategy_kind_from_string(std::string_view s) {
  for (auto k : kAllKinds)
    if (to_string(k) == s) return k;
  throw ConfigError("unknown strategy kind '" + std::string(s) + "'");
}

bool is_learned(StrategyKind kind) {
  return kind == StrategyKind::regression || kind == StrategyKind::regression_perturb ||
         kind == StrategyKind::ensemble || is_multi_head(kind);
}

void StrategyConfig::validate() const {
  if (K < 1) throw ConfigError("strategy K must be >= 1");
  const bool single = kind == StrategyKind::warm_start || kind == StrategyKind::oracle_proxy ||
                      kind == StrategyKind::regression;
  if (single && K != 1) throw ConfigError(std::string(to_string(kind)) + " requires K = 1");
  if (kind == StrategyKind::ensemble && !model_paths.empty() && static_cast<int>(model_paths.size()) != K)
    throw ConfigError("ensemble requires K model paths");
  if (is_learned(kind) && kind != StrategyKind::ensemble && model_paths.size() > 1)
    throw ConfigError(std::string(to_string(kind)) + " takes a single model path");
  if (perturb_sigma.size() > 0 && !(perturb_sigma.array() >= 0.0).all())
    throw ConfigError("perturb_sigma must be >= 0");
}

StrategyConfig strategy_config_from_json(const nlohmann::json& j) {
  StrategyConfig c;
  c.kind = strategy_kind_from_string(j.at("kind").get<std::string>());
  c.K = j.value("K", 1);
  if (j.contains("perturb_sigma")) {
    const auto v = j.at("perturb_sigma").get<std::vector<double>>();
    c.perturb_sigma = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (j.contains("model_paths")) c.model_paths = j.at("model_paths").get<std::vector<std::string>>();
  if (j.contains("model_path")) c.model_paths = {j.at("model_path").get<std::string>()};
  c.include_default = j.value("include_default", false);
  c.seed = j.value("seed", std::uint64_t{0});
  c.validate();
  return c;
}

nlohmann::json to_json(const StrategyConfig& c) {
  nlohmann::json j = {{"kind", std::string(to_string(c.kind))},
                      {"K", c.K},
                      {"include_default", c.include_default},
                      {"seed", c.seed},
                      {"model_paths", c.model_paths}};
  if (c.perturb_sigma.size() > 0)
    j["perturb_sigma"] = std::vector<double>(c.perturb_sigma.data(), c.perturb_sigma.data() + c.perturb_sigma.size());
  return j;
}

Strategy::Strategy(StrategyConfig cfg, const Environment& env) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (is_learned(cfg_.kind)) {
    if (cfg_.model_paths.empty()) throw ConfigError(std::string(to_string(cfg_.kind)) + " requires a model path");
    for (const auto& path : cfg_.model_paths) models_.push_back(checkpoint_load(path, env.id()));
  }
  check_models(env);
}

Strategy::Strategy(StrategyConfig cfg, const Environment& env, std::vector<ModelParams> models)
    : cfg_(std::move(cfg)), models_(std::move(models)) {
  cfg_.validate();
  check_models(env);
}

void Strategy::check_models(const Environment& env) {
  if (is_learned(cfg_.kind)) {
    const std::size_t want = cfg_.kind == StrategyKind::ensemble ? static_cast<std::size_t>(cfg_.K) : 1;
    if (models_.size() != want) throw ConfigError("strategy has the wrong number of models");
    const int fdim = feature_shape(env).size();
    for (const auto& m : models_) {
      if (m.env_id != env.id())
        throw EnvMismatchError("model is for " + std::string(to_string(m.env_id)) + ", environment is " +
                               std::string(to_string(env.id())));
      if (m.feature_dim != fdim || m.horizon != env.horizon() || m.control_dim != env.control_dim())
        throw DimensionError("model shape does not match the environment");
    }
    if (is_multi_head(cfg_.kind) && models_.front().K() < cfg_.K)
      throw ConfigError("model has " + std::to_string(models_.front().K()) + " heads, strategy asks for " +
                        std::to_string(cfg_.K));
  }
  sigma_ = cfg_.perturb_sigma.size() > 0 ? cfg_.perturb_sigma : Vector(0.1 * (env.u_max() - env.u_min()));
  if (sigma_.size() != env.control_dim()) throw DimensionError("perturb_sigma size != control dim");
}

ControlSequence default_candidate(const RunContext& ctx) {
  const int H = ctx.env->horizon();
  const int m = ctx.env->control_dim();
  if (ctx.warm_start) {
    if (ctx.warm_start->horizon() != H || ctx.warm_start->dim() != m)
      throw DimensionError("warm start shape does not match the environment");
    return *ctx.warm_start;
  }
  if (ctx.previous) {
    if (ctx.previous->horizon() != H || ctx.previous->dim() != m)
      throw DimensionError("previous solution shape does not match the environment");
    return warm_start_shift(*ctx.previous);
  }
  return ControlSequence::zeros(H, m);
}

CandidateSet propose(const Strategy& strategy, const RunContext& ctx) {
  if (ctx.env == nullptr) throw Error("propose: missing environment");
  const Environment& env = *ctx.env;
  const StrategyConfig& cfg = strategy.config();
  const ControlSequence ws = env.clamp(default_candidate(ctx));
  const std::uint64_t noise_seed = derive_seed(ctx.seed, 0x9e11);
  CandidateSet set;

  auto add_perturbed = [&](const ControlSequence& base, const std::string& prefix) {
    const auto samples = kernels::perturb(base, cfg.K, strategy.sigma(), noise_seed, Exec::serial);
    for (int k = 0; k < cfg.K; ++k) set.push_back(env.clamp(samples[k]), prefix + std::to_string(k));
  };

  switch (cfg.kind) {
    case StrategyKind::warm_start: set.push_back(ws, "warm_start"); break;
    case StrategyKind::oracle_proxy: set.push_back(ws, "oracle_proxy"); break;
    case StrategyKind::warm_start_perturb: add_perturbed(ws, "warm_start_perturb_"); break;
    case StrategyKind::regression:
    case StrategyKind::regression_perturb: {
      const auto heads = forward(strategy.models().front(), features_for(env, ctx.psi, ws));
      const ControlSequence base = env.clamp(heads.candidates.front());
      if (cfg.kind == StrategyKind::regression)
        set.push_back(base, "regression");
      else
        add_perturbed(base, "regression_perturb_");
      break;
    }
    case StrategyKind::ensemble: {
      const Vector f = features_for(env, ctx.psi, ws);
      for (int k = 0; k < cfg.K; ++k)
        set.push_back(env.clamp(forward(strategy.models()[k], f).candidates.front()), "ensemble_" + std::to_string(k));
      break;
    }
    case StrategyKind::multi_output_regression:
    case StrategyKind::miso_pd:
    case StrategyKind::miso_wta:
    case StrategyKind::miso_mix: {
      const auto heads = forward(strategy.models().front(), features_for(env, ctx.psi, ws));
      for (int k = 0; k < cfg.K; ++k) set.push_back(env.clamp(heads.candidates[k]), "miso_head_" + std::to_string(k));
      break;
    }
  }
  if (cfg.include_default) set.push_back(ws, "warm_start");
  return set;
}

double rollout_cost_selection(const Environment& env, const ProblemInstance& psi, const ControlSequence& u) {
  return rollout_cost_or_inf(env, psi, u);
}

Selection select(const CandidateSet& candidates, const ProblemInstance& psi, const Environment& env, Exec exec,
                 const SelectionFn& fn) {
  if (candidates.size() == 0) throw Error("select: empty candidate set");
  Selection s;
  s.costs.assign(candidates.size(), 0.0);
  for_each_index(exec, candidates.size(), [&](std::size_t i) {
    const double c = fn(env, psi, candidates.candidates[i]);
    s.costs[i] = std::isnan(c) ? std::numeric_limits<double>::infinity() : c;
  });
  for (std::size_t i = 1; i < s.costs.size(); ++i)
    if (s.costs[i] < s.costs[static_cast<std::size_t>(s.index)]) s.index = static_cast<int>(i);
  return s;
}

std::uint64_t candidate_seed(const RunContext& ctx, const CandidateSet& set, int i) {
  const bool is_default = set.labels[static_cast<std::size_t>(i)] == "warm_start";
  return derive_seed(ctx.seed, is_default ? 0 : static_cast<std::uint64_t>(i) + 1);
}

namespace {

Solution solve_or_inf(const Strategy& strategy, const RunContext& ctx, const EnvProblem& problem,
                      const ControlSequence& init, std::uint64_t seed) {
  try {
    Solution s = strategy.config().kind == StrategyKind::oracle_proxy
                     ? oracle_solve(*ctx.env, ctx.psi, init, ctx.oracle, seed)
                     : solve(problem, init, ctx.online, seed);
    if (!std::isfinite(s.trajectory.cost)) s.trajectory.cost = std::numeric_limits<double>::infinity();
    return s;
  } catch (const Error&) {
    Solution s;
    s.trajectory.cost = std::numeric_limits<double>::infinity();
    s.init_cost = std::numeric_limits<double>::infinity();
    return s;
  }
}

void audit(const Environment& env, const Solution& s, StrategyRun& run) {
  if (!std::isfinite(s.trajectory.cost)) return;
  if (!(s.trajectory.cost <= s.init_cost + 1e-9)) ++run.monotone_violations;
  if (!env.within_bounds(ControlSequence(s.trajectory.controls))) ++run.feasibility_violations;
}

}  // namespace

Solution oracle_solve(const Environment& env, const ProblemInstance& psi, const ControlSequence& init,
                      const OptimizerConfig& cfg, std::uint64_t seed, std::optional<int> toy_basin) {
  const EnvProblem problem(env, psi);
  if (env.id() != EnvId::toy1d) return solve(problem, init, cfg, seed);
  std::vector<ControlSequence> starts = {init};
  for (double level : {-1.0, -0.9, -0.5, 0.5, 0.9, 1.0})
    starts.emplace_back(Matrix::Constant(env.horizon(), env.control_dim(), level));
  const double optima[2] = {-1.5, 2.0};
  std::optional<Solution> best, best_in_basin;
  for (const auto& start : starts) {
    Solution s = solve(problem, start, cfg, seed);
    if (!best || s.trajectory.cost < best->trajectory.cost) best = s;
    const double xf = s.trajectory.states(env.horizon(), 0);
    if (toy_basin && std::abs(xf - optima[*toy_basin != 0]) <= 0.05 &&
        (!best_in_basin || s.trajectory.cost < best_in_basin->trajectory.cost))
      best_in_basin = s;
  }
  Solution out = best_in_basin ? *best_in_basin : *best;
  // Report the cost of the caller's initialization, not of the winning restart.
  out.init_cost = rollout_cost_or_inf(env, psi, env.clamp(init));
  return out;
}

StrategyRun run_single_optimizer(const Strategy& strategy, const RunContext& ctx, Exec exec) {
  const auto t0 = std::chrono::steady_clock::now();
  StrategyRun run;
  const CandidateSet set = propose(strategy, ctx);
  run.propose_ms = ms_since(t0);
  run.labels = set.labels;
  const Selection sel = select(set, ctx.psi, *ctx.env, exec);
  run.selected = sel.index;
  run.init_costs = sel.costs;
  const EnvProblem problem(*ctx.env, ctx.psi);
  run.solution = solve_or_inf(strategy, ctx, problem, set.candidates[static_cast<std::size_t>(sel.index)],
                              candidate_seed(ctx, set, sel.index));
  if (!std::isfinite(run.solution.trajectory.cost)) throw Error("run_single_optimizer: solve failed");
  audit(*ctx.env, run.solution, run);
  run.total_ms = ms_since(t0);
  return run;
}

StrategyRun run_multiple_optimizers(const Strategy& strategy, const RunContext& ctx, Exec exec) {
  const auto t0 = std::chrono::steady_clock::now();
  StrategyRun run;
  const CandidateSet set = propose(strategy, ctx);
  run.propose_ms = ms_since(t0);
  run.labels = set.labels;
  const EnvProblem problem(*ctx.env, ctx.psi);
  std::vector<Solution> solutions(set.size());
  for_each_index(exec, set.size(), [&](std::size_t i) {
    solutions[i] = solve_or_inf(strategy, ctx, problem, set.candidates[i], candidate_seed(ctx, set, static_cast<int>(i)));
  });
  for (const auto& s : solutions) audit(*ctx.env, s, run);
  run.init_costs.reserve(set.size());
  run.final_costs.reserve(set.size());
  for (const auto& s : solutions) {
    run.init_costs.push_back(s.init_cost);
    run.final_costs.push_back(s.trajectory.cost);
  }
  int best = 0;
  for (std::size_t i = 1; i < solutions.size(); ++i)
    if (run.final_costs[i] < run.final_costs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  if (!std::isfinite(run.final_costs[static_cast<std::size_t>(best)]))
    throw Error("run_multiple_optimizers: every candidate solve failed");
  run.selected = best;
  run.solution = std::move(solutions[static_cast<std::size_t>(best)]);
  run.total_ms = ms_since(t0);
  return run;
}

}  // namespace miso
