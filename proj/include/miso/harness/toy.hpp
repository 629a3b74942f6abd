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
#include <vector>

#include "miso/core/types.hpp"
#include "miso/envs/environment.hpp"
#include "miso/net/model.hpp"
#include "miso/parallel/exec.hpp"

namespace miso {

struct ToyDemoConfig {
  int records = 2000;
  int epochs = 300;
  int batch_size = 256;
  double lr = 3e-4;
  std::vector<int> hidden = {64, 64};
  int embed = 32;
  std::uint64_t seed = 7;
};

struct ToyRow {
  std::string method;  // ensemble, miso_pd, miso_wta, miso_mix
  std::vector<ControlSequence> controls;  // one per candidate
  std::vector<double> final_states;       // x_{H} after unrolling each candidate
  std::vector<ModelParams> models;        // two members for the ensemble, else one K=2 model
};

/// Trains the four K=2 predictors on toy data and unrolls their candidates
/// from the standard toy instance (x0 = 0, zero warm start).
std::vector<ToyRow> toy_demo(const ToyDemoConfig& cfg = {}, Exec exec = default_exec());

/// Plain-text table: one line per candidate with its controls and final state.
std::string format_toy_table(const std::vector<ToyRow>& rows);

}  // namespace miso
