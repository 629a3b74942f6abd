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

#include <json.hpp>

#include "miso/envs/environment.hpp"

namespace miso {

/// Overrides defaults for `json["env"]` with any of the keys
/// m_c, m_p, l, g, n_sub_steps, dt, H, u_min, u_max, Q, R, Q_terminal, T_env,
/// damping, gear, link1, link2, mass1, mass2, wrist_limit_deg, wheelbase,
/// v_min, max_steer_deg, divergence_penalty.
EnvParams env_params_from_json(const nlohmann::json& j);
EnvParams load_env_config(const std::string& path);
nlohmann::json env_params_to_json(const EnvParams& p);

}  // namespace miso
