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
#include <string>
#include <vector>

#include <json.hpp>

#include "miso/core/types.hpp"
#include "miso/envs/environment.hpp"
#include "miso/losses/losses.hpp"
#include "miso/net/adamw.hpp"
#include "miso/net/model.hpp"
#include "miso/parallel/exec.hpp"

namespace miso {

struct TrainConfig {
  LossConfig loss;
  int K = 1;  // forced to 1 for regression
  std::vector<int> hidden = {256, 256};
  int embed = 64;
  int epochs = 125;
  int batch_size = 1024;
  AdamWConfig adam;
  std::uint64_t seed = 0;
  double val_fraction = 0.1;

  void validate() const;
};

/// Table 3 settings for the environment and loss kind.
TrainConfig default_train_config(EnvId env, LossKind kind, int K);

TrainConfig train_config_from_json(const nlohmann::json& j, EnvId env);
nlohmann::json to_json(const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::vector<double> winner_frequency;  // validation, per head
};

struct TrainResult {
  ModelParams best;
  int best_epoch = 0;
  std::vector<EpochLog> log;
  std::size_t train_count = 0;
  std::size_t val_count = 0;
};

/// True when the record belongs to the validation split.
bool in_validation(std::uint32_t instance_id, double val_fraction);

/// Fits standardizers on the training split, runs shuffled minibatch AdamW and
/// keeps the parameters with the lowest validation loss. Throws Error on an
/// empty dataset or a non-finite loss.
TrainResult train(const Environment& env, const std::vector<DatasetRecord>& records, const TrainConfig& cfg,
                  Exec exec = default_exec());

nlohmann::json to_json(const EpochLog& e);

}  // namespace miso
