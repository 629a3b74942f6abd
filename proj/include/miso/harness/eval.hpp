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

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "miso/envs/environment.hpp"
#include "miso/init/strategy.hpp"
#include "miso/optim/config.hpp"
#include "miso/parallel/exec.hpp"

namespace miso {

enum class EvalMode { one_off, sequential };
enum class Execution { single, multiple };

std::string_view to_string(EvalMode m);
EvalMode eval_mode_from_string(std::string_view s);
std::string_view to_string(Execution e);
Execution execution_from_string(std::string_view s);

struct EvalConfig {
  EvalMode mode = EvalMode::one_off;
  Execution execution = Execution::single;
  int instances = 200;       // one-off
  int episodes = 10;         // sequential
  int episode_length = 0;    // 0 uses T_env
  std::uint64_t seed = 1;
  OptimizerConfig online;
  OptimizerConfig oracle;
  double divergence_penalty = 0.0;  // 0 uses the environment default

  void validate() const;
};

EvalConfig default_eval_config(EnvId env);
/// Reads the fields of EvalConfig; absent ones keep the environment defaults.
EvalConfig eval_config_from_json(const nlohmann::json& j, EnvId env);
nlohmann::json to_json(const EvalConfig& cfg);

struct EvalRow {
  std::uint32_t instance_id = 0;  // episode index in sequential mode
  double cost = 0.0;
  int selected_index = 0;
  std::vector<double> init_costs;  // first step in sequential mode
  std::vector<int> selections;     // every step (one entry in one-off mode)
  bool guarantee_ok = true;
  bool diverged = false;
  int steps = 1;
  State final_state;  // last finite state reached (initial state in one-off mode)
  int monotone_violations = 0;
  int feasibility_violations = 0;
  double solve_time_ms = 0.0;
};

struct EvalReport {
  EvalMode mode = EvalMode::one_off;
  Execution execution = Execution::single;
  EnvId env_id = EnvId::toy1d;
  std::string strategy;
  StrategyConfig strategy_config;
  std::vector<EvalRow> rows;  // sorted by instance_id
  double mean_cost = 0.0;
  double std_error = 0.0;
  std::vector<double> argmin_frequency;
  int guarantee_violations = 0;
  int monotone_violations = 0;
  int feasibility_violations = 0;
  int diverged = 0;
  nlohmann::json config;

  /// Recomputes the aggregates from `rows`.
  void finalize();
};

struct NamedStrategy {
  std::string name;
  Strategy strategy;
};

/// Every strategy sees the same instance list and per-instance seeds.
/// One-off instances come from held-out warm-start episodes; the cost is the
/// optimizer's trajectory cost J. Sequential episodes execute the first
/// control of each solution; the cost is the mean executed stage cost, with
/// the divergence penalty added before averaging when the state blows up.
std::vector<EvalReport> evaluate(const Environment& env, const EvalConfig& cfg,
                                 const std::vector<NamedStrategy>& strategies, Exec exec = default_exec());

/// Summary object without rows.
nlohmann::json summary_json(const EvalReport& r);
nlohmann::json row_json(const EvalReport& r, const EvalRow& row);

/// JSON lines (one summary then its rows per strategy). Timing is left out so
/// reports of equal runs are byte-identical.
std::string report_jsonl(const std::vector<EvalReport>& reports);
std::string report_csv(const std::vector<EvalReport>& reports);
nlohmann::json report_timing(const std::vector<EvalReport>& reports);

/// Writes `path`, `path.csv` and `path.timing.json`.
void write_reports(const std::string& path, const std::vector<EvalReport>& reports);

}  // namespace miso
