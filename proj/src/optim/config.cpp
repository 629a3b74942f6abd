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

#include "miso/optim/config.hpp"

#include <fstream>

#include "miso/core/error.hpp"

namespace miso {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ilqr: return "ilqr";
    case Algorithm::box_ddp: return "box_ddp";
    case Algorithm::mppi: return "mppi";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view s) {
  if (s == "ilqr") return Algorithm::ilqr;
  if (s == "box_ddp" || s == "boxddp") return Algorithm::box_ddp;
  if (s == "mppi") return Algorithm::mppi;
  throw ConfigError("unknown optimizer algorithm '" + std::string(s) + "'");
}

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (max_linesearch_iter < 1) throw ConfigError("max_linesearch_iter must be >= 1");
  if (!(reg_min <= reg_init && reg_init <= reg_max) || reg_min < 0.0)
    throw ConfigError("regularization must satisfy 0 <= reg_min <= reg_init <= reg_max");
  if (mppi.num_samples < 1) throw ConfigError("num_samples must be >= 1");
  if (!(mppi.noise_sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
  if (!(mppi.temperature > 0.0)) throw ConfigError("lambda must be positive");
  if (budget_mode == BudgetMode::wall_clock_ms && !(max_solve_time_ms > 0.0))
    throw ConfigError("max_solve_time_ms must be positive");
}

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
  OptimizerConfig c;
  try {
    if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    if (j.contains("lqr_iter")) c.max_iters = j.at("lqr_iter").get<int>();
    if (j.contains("max_iters")) c.max_iters = j.at("max_iters").get<int>();
    if (j.contains("max_linesearch_iter")) c.max_linesearch_iter = j.at("max_linesearch_iter").get<int>();
    if (j.contains("reg_init")) c.reg_init = j.at("reg_init").get<double>();
    if (j.contains("reg_min")) c.reg_min = j.at("reg_min").get<double>();
    if (j.contains("reg_max")) c.reg_max = j.at("reg_max").get<double>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("num_samples")) c.mppi.num_samples = j.at("num_samples").get<int>();
    if (j.contains("sigma2")) c.mppi.noise_sigma2 = j.at("sigma2").get<double>();
    if (j.contains("lambda")) c.mppi.temperature = j.at("lambda").get<double>();
    if (j.contains("max_solve_time_ms")) c.max_solve_time_ms = j.at("max_solve_time_ms").get<double>();
    if (j.contains("budget_mode")) {
      const auto mode = j.at("budget_mode").get<std::string>();
      if (mode == "iterations") c.budget_mode = BudgetMode::iterations;
      else if (mode == "wall_clock_ms") c.budget_mode = BudgetMode::wall_clock_ms;
      else throw ConfigError("unknown budget_mode '" + mode + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("optimizer config: ") + e.what());
  }
  c.validate();
  return c;
}

OptimizerConfig load_optimizer_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open optimizer config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return optimizer_config_from_json(j);
}

nlohmann::json to_json(const OptimizerConfig& c) {
  return {{"algorithm", std::string(to_string(c.algorithm))},
          {"max_iters", c.max_iters},
          {"max_linesearch_iter", c.max_linesearch_iter},
          {"reg_init", c.reg_init},
          {"reg_min", c.reg_min},
          {"reg_max", c.reg_max},
          {"tol", c.tol},
          {"num_samples", c.mppi.num_samples},
          {"sigma2", c.mppi.noise_sigma2},
          {"lambda", c.mppi.temperature},
          {"budget_mode", c.budget_mode == BudgetMode::iterations ? "iterations" : "wall_clock_ms"},
          {"max_solve_time_ms", c.max_solve_time_ms}};
}

OptimizerConfig online_profile(EnvId env) {
  OptimizerConfig c;
  switch (env) {
    case EnvId::toy1d:
      c.algorithm = Algorithm::box_ddp;
      c.max_iters = 3;
      c.max_linesearch_iter = 4;
      break;
    case EnvId::cartpole:
      c.algorithm = Algorithm::box_ddp;
      c.max_iters = 2;
      c.max_linesearch_iter = 1;
      break;
    case EnvId::reacher:
      c.algorithm = Algorithm::mppi;
      c.max_iters = 1;
      c.mppi = {3, 1e-3, 1e-4};
      break;
    case EnvId::driving:
      c.algorithm = Algorithm::ilqr;
      c.max_iters = 2;
      c.max_linesearch_iter = 4;
      c.max_solve_time_ms = 5.0;
      break;
  }
  return c;
}

OptimizerConfig oracle_profile(EnvId env) {
  OptimizerConfig c = online_profile(env);
  switch (env) {
    case EnvId::toy1d:
      c.max_iters = 50;
      c.max_linesearch_iter = 10;
      break;
    case EnvId::cartpole:
      c.max_iters = 10;
      c.max_linesearch_iter = 3;
      break;
    case EnvId::reacher:
      c.mppi.num_samples = 50;
      break;
    case EnvId::driving:
      c.max_iters = 20;
      c.max_linesearch_iter = 8;
      c.max_solve_time_ms = 50.0;
      break;
  }
  return c;
}

}  // namespace miso
