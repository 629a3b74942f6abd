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

#include <string_view>
#include <vector>

#include "miso/core/types.hpp"
#include "miso/envs/environment.hpp"

namespace miso {

enum class Phi : std::uint8_t { tanh, clamp1 };
enum class Distance : std::uint8_t { l2, l1 };

std::string_view to_string(Phi phi);
Phi phi_from_string(std::string_view s);
std::string_view to_string(Distance d);
Distance distance_from_string(std::string_view s);

struct LossConfig {
  LossKind kind = LossKind::regression;
  double control_weight = 1.0;
  double state_weight = 0.0;
  double alpha_k = 0.0;
  Phi phi = Phi::tanh;
  Distance distance = Distance::l2;
  double divergence_penalty = 1e3;  // added to L_control when the rollout diverges

  void validate() const;
};

/// Table 3 weights; toy1d uses control-only regression.
LossConfig default_loss_config(EnvId env, LossKind kind);

struct RegLoss {
  double value = 0.0;
  double control = 0.0;
  double state = 0.0;
  Matrix grad;  // H x m
  bool diverged = false;
};

/// control_weight * (1/H) sum ||u_t - u*_t||^2 + state_weight * (1/H) sum_{t=1..H} ||x_t - x*_t||^2.
RegLoss reg_loss(const Environment& env, const ControlSequence& candidate, const DatasetRecord& record,
                 const LossConfig& cfg);

struct PdTerm {
  std::vector<double> values;  // L_PD,k
  std::vector<Matrix> grads;   // d(sum_k w_k L_PD,k)/d candidate_i
};

/// Mean distance from each candidate to the others. Gradients are of
/// sum_k weights[k] * L_PD,k; empty weights means 1/K each.
PdTerm pd_term(const std::vector<ControlSequence>& candidates, const LossConfig& cfg,
               const std::vector<double>& weights = {});

struct MultiLoss {
  double value = 0.0;
  int winner = -1;  // -1 for losses without a winner
  std::vector<double> reg_values;
  std::vector<double> pd_values;
  std::vector<Matrix> grads;
  int diverged = 0;
};

/// Mean of the per-candidate regression losses.
MultiLoss multi_output_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                            const DatasetRecord& record, const LossConfig& cfg);
/// mean_k L_reg,k - alpha_k * mean_k L_PD,k.
MultiLoss pairwise_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                        const DatasetRecord& record, const LossConfig& cfg);
/// min_k L_reg,k; only the winner receives gradient.
MultiLoss wta_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                   const DatasetRecord& record, const LossConfig& cfg);
/// min_k (L_reg,k - alpha_k * Phi(L_PD,k)).
MultiLoss mix_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                   const DatasetRecord& record, const LossConfig& cfg);

/// Dispatch on cfg.kind (regression uses the first candidate only).
MultiLoss evaluate_loss(const Environment& env, const std::vector<ControlSequence>& candidates,
                        const DatasetRecord& record, const LossConfig& cfg);

double phi_value(Phi phi, double z);
double phi_derivative(Phi phi, double z);

}  // namespace miso
