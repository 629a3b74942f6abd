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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "miso/core/types.hpp"
#include "miso/envs/environment.hpp"
#include "miso/optim/config.hpp"
#include "miso/parallel/exec.hpp"

namespace miso {

struct GenDataConfig {
  int episodes = 1;
  int episode_length = 0;  // 0 uses the environment's T_env (1 for toy1d)
  std::uint64_t seed = 0;
  OptimizerConfig online;
  OptimizerConfig oracle;
};

/// Defaults to the environment's online and oracle profiles.
GenDataConfig default_gen_data_config(EnvId env);

struct DataSummary {
  EnvId env_id = EnvId::toy1d;
  std::size_t records = 0;
  int episodes = 0;
  double oracle_improved_fraction = 0.0;  // oracle cost < online cost
  double mean_online_cost = 0.0;
  double mean_oracle_cost = 0.0;
  double stage_cost_p99 = 0.0;      // over executed warm-start steps
  double divergence_penalty = 0.0;  // 10 * stage_cost_p99
};

nlohmann::json to_json(const DataSummary& s);

/// One executed step of a warm-start episode.
struct WarmStartStep {
  ProblemInstance instance;
  std::optional<ControlSequence> previous;  // empty at the episode start
  ControlSequence warm_start;               // clamped shift of `previous`, zeros at the start
  double online_cost = 0.0;
  double stage_cost = 0.0;                  // of the executed first control
};

/// Runs episode `e` of a run seeded with `seed` for up to T steps (fewer if the
/// state diverges). instance_id = e * T + k.
std::vector<WarmStartStep> warm_start_episode(const Environment& env, const OptimizerConfig& online,
                                              std::uint64_t seed, int e, int T);

/// T_env used for data generation when the config leaves it at 0.
int default_episode_length(const Environment& env);

struct GeneratedData {
  std::vector<DatasetRecord> records;  // ordered by instance_id
  DataSummary summary;
};

/// Runs warm-start episodes with the online config, then replays every
/// recorded instance with the oracle config. instance_id = episode * T_env + step.
/// toy1d labels alternate between the two optima by instance_id parity.
GeneratedData gen_data(const Environment& env, const GenDataConfig& cfg, Exec exec = default_exec());

/// Writes the dataset, its JSON sidecar and `<path>.summary.json`.
void write_generated(const std::string& path, const Environment& env, const GeneratedData& data);

/// Seed of episode `e` in a run seeded with `seed`; evaluation uses a disjoint stream.
std::uint64_t episode_seed(std::uint64_t seed, int e);

}  // namespace miso
