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

#include "miso/harness/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "miso/core/dataset.hpp"
#include "miso/core/error.hpp"
#include "miso/core/rng.hpp"
#include "miso/core/rollout.hpp"
#include "miso/envs/scenario.hpp"
#include "miso/init/strategy.hpp"
#include "miso/optim/optimizers.hpp"
#include "miso/optim/problem.hpp"

namespace miso {

GenDataConfig default_gen_data_config(EnvId env) {
  GenDataConfig c;
  c.online = online_profile(env);
  c.oracle = oracle_profile(env);
  return c;
}

nlohmann::json to_json(const DataSummary& s) {
  return {{"env", std::string(to_string(s.env_id))},
          {"records", s.records},
          {"episodes", s.episodes},
          {"oracle_improved_fraction", s.oracle_improved_fraction},
          {"mean_online_cost", s.mean_online_cost},
          {"mean_oracle_cost", s.mean_oracle_cost},
          {"stage_cost_p99", s.stage_cost_p99},
          {"divergence_penalty", s.divergence_penalty}};
}

std::uint64_t episode_seed(std::uint64_t seed, int e) { return derive_seed(seed, static_cast<std::uint64_t>(e)); }

int default_episode_length(const Environment& env) {
  // The toy problem is one-shot: one record per episode.
  return env.id() == EnvId::toy1d ? 1 : env.params().episode_length;
}

std::vector<WarmStartStep> warm_start_episode(const Environment& env, const OptimizerConfig& online,
                                              std::uint64_t seed, int e, int T) {
  const std::uint64_t es = episode_seed(seed, e);
  Rng rng = make_rng(es);
  const Scenario sc = sample_scenario(env, rng);
  std::vector<WarmStartStep> steps;
  State x = sc.x0;
  std::optional<ControlSequence> previous;
  for (int k = 0; k < T; ++k) {
    WarmStartStep s;
    s.instance = sc.instance_at(env, k, x, static_cast<std::uint32_t>(e * T + k));
    s.instance.seed = derive_seed(es, static_cast<std::uint64_t>(k) + 1);
    s.previous = previous;
    s.warm_start = previous ? env.clamp(warm_start_shift(*previous))
                            : ControlSequence::zeros(env.horizon(), env.control_dim());
    const EnvProblem problem(env, s.instance);
    const Solution sol = solve(problem, s.warm_start, online, derive_seed(s.instance.seed, 0));
    s.online_cost = sol.trajectory.cost;
    const Control u0 = sol.trajectory.controls.row(0).transpose();
    s.stage_cost = env.stage_cost(0, x, u0, s.instance);
    steps.push_back(std::move(s));
    const State next = env.step(x, u0);
    if (!next.allFinite()) break;
    x = next;
    previous = ControlSequence(sol.trajectory.controls);
  }
  return steps;
}

GeneratedData gen_data(const Environment& env, const GenDataConfig& cfg, Exec exec) {
  if (cfg.episodes < 1) throw ConfigError("gen_data: episodes must be >= 1");
  const int T = cfg.episode_length > 0 ? cfg.episode_length : default_episode_length(env);
  std::vector<std::vector<WarmStartStep>> episodes(static_cast<std::size_t>(cfg.episodes));
  for_each_index(exec, episodes.size(), [&](std::size_t e) {
    episodes[e] = warm_start_episode(env, cfg.online, cfg.seed, static_cast<int>(e), T);
  });

  std::vector<WarmStartStep*> flat;
  std::vector<DatasetRecord> records;
  for (auto& ep : episodes)
    for (auto& s : ep) flat.push_back(&s);
  records.resize(flat.size());
  for_each_index(exec, flat.size(), [&](std::size_t i) {
    DatasetRecord& r = records[i];
    r.instance = flat[i]->instance;
    r.warm_start = flat[i]->warm_start;
    std::optional<int> basin;
    if (env.id() == EnvId::toy1d) basin = static_cast<int>(r.instance.instance_id % 2);
    const Solution oracle = oracle_solve(env, r.instance, r.warm_start, cfg.oracle, derive_seed(r.instance.seed, 1), basin);
    r.oracle_controls = ControlSequence(oracle.trajectory.controls);
    r.oracle_states = oracle.trajectory.states;
    r.oracle_cost = oracle.trajectory.cost;
    r.oracle_not_better = !(oracle.trajectory.cost < flat[i]->online_cost);
  });

  GeneratedData out;
  std::vector<double> stage;
  double improved = 0.0, online = 0.0, oracle = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    stage.push_back(flat[i]->stage_cost);
    improved += records[i].oracle_not_better ? 0.0 : 1.0;
    online += flat[i]->online_cost;
    oracle += records[i].oracle_cost;
  }
  out.records = std::move(records);
  const double n = static_cast<double>(flat.size());
  auto& sm = out.summary;
  sm.env_id = env.id();
  sm.records = flat.size();
  sm.episodes = cfg.episodes;
  sm.oracle_improved_fraction = improved / n;
  sm.mean_online_cost = online / n;
  sm.mean_oracle_cost = oracle / n;
  std::sort(stage.begin(), stage.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.99 * n)) - 1;
  sm.stage_cost_p99 = stage[std::min(idx, stage.size() - 1)];
  sm.divergence_penalty = 10.0 * sm.stage_cost_p99;
  return out;
}

void write_generated(const std::string& path, const Environment& env, const GeneratedData& data) {
  DatasetHeader shape;
  shape.env_id = env.id();
  shape.horizon = static_cast<std::uint32_t>(env.horizon());
  shape.state_dim = static_cast<std::uint32_t>(env.state_dim());
  shape.control_dim = static_cast<std::uint32_t>(env.control_dim());
  dataset_write(path, shape, data.records);
  std::ofstream out(path + ".summary.json");
  if (!out) throw Error("cannot write " + path + ".summary.json");
  out << to_json(data.summary).dump(2) << "\n";
}

}  // namespace miso
