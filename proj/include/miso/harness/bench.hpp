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

#include <vector>

#include <json.hpp>

#include "miso/envs/environment.hpp"

namespace miso {

struct BenchConfig {
  std::vector<int> K = {1, 2, 4, 8, 16, 32};
  int repetitions = 1000;
  int warmup = 100;
  std::vector<int> hidden = {256, 256};
  int embed = 64;
  std::uint64_t seed = 0;
};

struct BenchRow {
  int K = 1;
  double multi_mean_ms = 0.0, multi_std_ms = 0.0;        // one K-head model
  double ensemble_mean_ms = 0.0, ensemble_std_ms = 0.0;  // K one-head models
};

/// Single-sample forward-pass timing of freshly initialized models. Timing
/// does not depend on the weights, only on the architecture.
std::vector<BenchRow> bench_inference(const Environment& env, const BenchConfig& cfg);

nlohmann::json to_json(const BenchRow& r);

}  // namespace miso
