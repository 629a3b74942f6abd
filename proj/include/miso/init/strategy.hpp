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
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "miso/core/types.hpp"
#include "miso/envs/environment.hpp"
#include "miso/net/model.hpp"
#include "miso/optim/config.hpp"
#include "miso/optim/solution.hpp"
#include "miso/parallel/exec.hpp"

namespace miso {

enum class StrategyKind : std::uint8_t {
  warm_start,
  oracle_proxy,
  regression,
  warm_start_perturb,
  regression_perturb,
  multi_output_regression,
  ensemble,
  miso_pd,
  miso_wta,
  miso_mix,
};

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(std::string_view s);
bool is_learned(StrategyKind kind);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::warm_start;
  int K = 1;
  Vector perturb_sigma;  // per control dim; empty means 0.1 * (u_max - u_min)
  std::vector<std::string> model_paths;
  bool include_default = false;
  std::uint64_t seed = 0;

  void validate() const;
};

StrategyConfig strategy_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StrategyConfig& cfg);

/// A strategy with its checkpoints loaded and checked against the environment.
class Strategy {
 public:
  Strategy(StrategyConfig cfg, const Environment& env);
  /// Uses already-loaded models (ensemble: one per member; others: one).
  Strategy(StrategyConfig cfg, const Environment& env, std::vector<ModelParams> models);

  const StrategyConfig& config() const { return cfg_; }
  const std::vector<ModelParams>& models() const { return models_; }
  const Vector& sigma() const { return sigma_; }

 private:
  void check_models(const Environment& env);

  StrategyConfig cfg_;
  std::vector<ModelParams> models_;
  Vector sigma_;
};

struct RunContext {
  const Environment* env = nullptr;
  ProblemInstance psi;
  std::optional<ControlSequence> previous;    // last executed solution's controls
  std::optional<ControlSequence> warm_start;  // already shifted; takes precedence over previous
  OptimizerConfig online;
  OptimizerConfig oracle;
  std::uint64_t seed = 0;
};

/// Shifted previous solution, or zeros at the start of an episode.
ControlSequence default_candidate(const RunContext& ctx);

/// K candidates (1 for warm_start, oracle_proxy, regression), clamped to the
/// control bounds, plus "warm_start" last when include_default is set.
CandidateSet propose(const Strategy& strategy, const RunContext& ctx);

/// Scores one candidate; lower is better.
using SelectionFn =
    std::function<double(const Environment&, const ProblemInstance&, const ControlSequence&)>;

/// Rollout cost J, +infinity on divergence.
double rollout_cost_selection(const Environment& env, const ProblemInstance& psi, const ControlSequence& u);

struct Selection {
  int index = 0;
  std::vector<double> costs;
};

/// Argmin with lowest-index ties; index 0 when every score is +infinity.
Selection select(const CandidateSet& candidates, const ProblemInstance& psi, const Environment& env,
                 Exec exec = default_exec(), const SelectionFn& fn = rollout_cost_selection);

/// Oracle-budget solve from `init`. toy1d restarts from a fixed set of
/// constant sequences and keeps the cheapest result; with `toy_basin` set
/// (0 for -1.5, 1 for 2) only results ending within 0.05 of that optimum
/// compete, falling back to the cheapest overall when none does.
Solution oracle_solve(const Environment& env, const ProblemInstance& psi, const ControlSequence& init,
                      const OptimizerConfig& cfg, std::uint64_t seed, std::optional<int> toy_basin = std::nullopt);

struct StrategyRun {
  Solution solution;
  int selected = 0;
  std::vector<std::string> labels;
  std::vector<double> init_costs;   // per candidate
  std::vector<double> final_costs;  // per candidate (multiple optimizers only)
  double propose_ms = 0.0;
  double total_ms = 0.0;
  int monotone_violations = 0;     // solves with cost > init cost + 1e-9
  int feasibility_violations = 0;  // solves leaving the control bounds
};

/// Seed slot of candidate i: the "warm_start" label always maps to slot 0 so a
/// default candidate is solved exactly as in the warm-start-only pipeline.
std::uint64_t candidate_seed(const RunContext& ctx, const CandidateSet& set, int i);

StrategyRun run_single_optimizer(const Strategy& strategy, const RunContext& ctx, Exec exec = default_exec());
StrategyRun run_multiple_optimizers(const Strategy& strategy, const RunContext& ctx, Exec exec = default_exec());

}  // namespace miso
