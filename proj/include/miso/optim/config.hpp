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

#include <string>
#include <string_view>

#include <json.hpp>

#include "miso/core/types.hpp"

namespace miso {

enum class Algorithm { ilqr, box_ddp, mppi };
enum class BudgetMode { iterations, wall_clock_ms };

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view s);

struct MppiConfig {
  int num_samples = 3;
  double noise_sigma2 = 1e-3;  // per-coordinate noise variance
  double temperature = 1e-4;   // lambda
};

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::ilqr;
  int max_iters = 2;
  int max_linesearch_iter = 1;
  double reg_init = 1e-6;
  double reg_min = 1e-9;
  double reg_max = 1e9;
  double tol = 1e-9;  // stop when the cost decrease falls below this
  MppiConfig mppi;
  BudgetMode budget_mode = BudgetMode::iterations;
  double max_solve_time_ms = 5.0;

  void validate() const;
};

/// Reads the keys algorithm, max_iters (alias lqr_iter), max_linesearch_iter,
/// reg_init, reg_min, reg_max, tol, budget_mode, max_solve_time_ms,
/// num_samples, sigma2, lambda.
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);
OptimizerConfig load_optimizer_config(const std::string& path);
nlohmann::json to_json(const OptimizerConfig& cfg);

/// Shipped "online" and "oracle" profiles per environment.
OptimizerConfig online_profile(EnvId env);
OptimizerConfig oracle_profile(EnvId env);

}  // namespace miso
