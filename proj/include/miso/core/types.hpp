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
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace miso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using State = Eigen::VectorXd;
using Control = Eigen::VectorXd;

enum class EnvId : std::uint8_t { toy1d = 0, cartpole = 1, reacher = 2, driving = 3 };

std::string_view to_string(EnvId id);
EnvId env_id_from_string(std::string_view name);

/// Training objective a model was fitted with (recorded in checkpoints).
enum class LossKind : std::uint8_t { regression = 0, multi_output = 1, pairwise = 2, wta = 3, mix = 4 };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// Problem parameters: initial state plus either a goal state or a reference
/// trajectory of H states (driving).
struct ProblemInstance {
  EnvId env_id = EnvId::toy1d;
  State x0;
  std::optional<State> goal;
  std::optional<Matrix> reference;  // H x n, row t is the target for states[t+1]
  std::uint32_t instance_id = 0;
  std::uint64_t seed = 0;
};

/// H x m controls. A control sequence fully determines a solution once x0 is fixed.
struct ControlSequence {
  Matrix controls;

  ControlSequence() = default;
  explicit ControlSequence(Matrix u) : controls(std::move(u)) {}
  static ControlSequence zeros(int horizon, int control_dim) {
    return ControlSequence(Matrix::Zero(horizon, control_dim));
  }

  int horizon() const { return static_cast<int>(controls.rows()); }
  int dim() const { return static_cast<int>(controls.cols()); }
  Control at(int t) const { return controls.row(t).transpose(); }
  bool all_finite() const { return controls.allFinite(); }

  friend bool operator==(const ControlSequence& a, const ControlSequence& b) {
    return a.controls.rows() == b.controls.rows() && a.controls.cols() == b.controls.cols() &&
           a.controls == b.controls;
  }
};

struct Trajectory {
  Matrix states;    // (H+1) x n
  Matrix controls;  // H x m
  double cost = 0.0;
};

struct CandidateSet {
  std::vector<ControlSequence> candidates;
  std::vector<std::string> labels;

  std::size_t size() const { return candidates.size(); }
  void push_back(ControlSequence c, std::string label) {
    candidates.push_back(std::move(c));
    labels.push_back(std::move(label));
  }
};

struct DatasetRecord {
  ProblemInstance instance;
  ControlSequence warm_start;
  ControlSequence oracle_controls;
  Matrix oracle_states;  // (H+1) x n
  double oracle_cost = 0.0;
  // Set when the oracle did not beat the warm-start-initialized online solve.
  bool oracle_not_better = false;
};

}  // namespace miso
