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

#include "miso/envs/config.hpp"

#include <fstream>
#include <numbers>

#include "miso/core/error.hpp"

namespace miso {

namespace {

Vector to_vector(const nlohmann::json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string(key) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json from_vector(const Vector& v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(x);
  return out;
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

EnvParams env_params_from_json(const nlohmann::json& j) {
  if (!j.contains("env")) throw ConfigError("environment config needs an 'env' key");
  EnvParams p = default_params(env_id_from_string(j.at("env").get<std::string>()));
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  auto integer = [&](const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
  };
  auto vector = [&](const char* key, Vector& out) {
    if (j.contains(key)) out = to_vector(j.at(key), key);
  };
  try {
    num("dt", p.dt);
    integer("H", p.horizon);
    integer("T_env", p.episode_length);
    vector("u_min", p.u_min);
    vector("u_max", p.u_max);
    vector("Q", p.Q);
    vector("R", p.R);
    if (j.contains("Q") && !j.contains("Q_terminal")) p.Q_terminal = p.Q;
    vector("Q_terminal", p.Q_terminal);
    num("divergence_penalty", p.divergence_penalty);
    num("m_c", p.cartpole.m_c);
    num("m_p", p.cartpole.m_p);
    num("l", p.cartpole.l);
    num("g", p.cartpole.g);
    integer("n_sub_steps", p.cartpole.n_sub_steps);
    num("damping", p.reacher.damping);
    num("gear", p.reacher.gear);
    num("link1", p.reacher.link1);
    num("link2", p.reacher.link2);
    num("mass1", p.reacher.mass1);
    num("mass2", p.reacher.mass2);
    if (j.contains("wrist_limit_deg")) p.reacher.wrist_limit = j.at("wrist_limit_deg").get<double>() * kDeg;
    num("wheelbase", p.driving.wheelbase);
    num("v_min", p.driving.v_min_linearization);
    if (j.contains("max_steer_deg")) p.driving.max_steer = j.at("max_steer_deg").get<double>() * kDeg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("environment config: ") + e.what());
  }
  p.validate();
  return p;
}

EnvParams load_env_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open environment config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return env_params_from_json(j);
}

nlohmann::json env_params_to_json(const EnvParams& p) {
  nlohmann::json j;
  j["env"] = std::string(to_string(p.id));
  j["dt"] = p.dt;
  j["H"] = p.horizon;
  j["T_env"] = p.episode_length;
  j["u_min"] = from_vector(p.u_min);
  j["u_max"] = from_vector(p.u_max);
  j["Q"] = from_vector(p.Q);
  j["R"] = from_vector(p.R);
  j["Q_terminal"] = from_vector(p.Q_terminal);
  j["divergence_penalty"] = p.divergence_penalty;
  switch (p.id) {
    case EnvId::cartpole:
      j["m_c"] = p.cartpole.m_c;
      j["m_p"] = p.cartpole.m_p;
      j["l"] = p.cartpole.l;
      j["g"] = p.cartpole.g;
      j["n_sub_steps"] = p.cartpole.n_sub_steps;
      break;
    case EnvId::reacher:
      j["damping"] = p.reacher.damping;
      j["gear"] = p.reacher.gear;
      j["link1"] = p.reacher.link1;
      j["link2"] = p.reacher.link2;
      j["mass1"] = p.reacher.mass1;
      j["mass2"] = p.reacher.mass2;
      j["wrist_limit_deg"] = p.reacher.wrist_limit / kDeg;
      break;
    case EnvId::driving:
      j["wheelbase"] = p.driving.wheelbase;
      j["v_min"] = p.driving.v_min_linearization;
      j["max_steer_deg"] = p.driving.max_steer / kDeg;
      break;
    case EnvId::toy1d:
      break;
  }
  return j;
}

}  // namespace miso
