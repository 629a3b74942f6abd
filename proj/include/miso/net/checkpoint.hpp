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

#include <optional>
#include <string>
#include <vector>

#include "miso/net/model.hpp"

namespace miso {

inline constexpr char kCheckpointMagic[] = "MISONET";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Header, then little-endian float64 tensors in the order
/// u_min, u_max, in_mean, in_std, out_mean, out_std, out_scale, theta.
std::vector<char> checkpoint_encode(const ModelParams& params);
ModelParams checkpoint_decode(const std::vector<char>& bytes, std::optional<EnvId> expected_env = std::nullopt,
                              std::optional<int> expected_feature_dim = std::nullopt);

void checkpoint_save(const ModelParams& params, const std::string& path);

/// Throws EnvMismatchError / DimensionError when the expectations are not met.
ModelParams checkpoint_load(const std::string& path, std::optional<EnvId> expected_env = std::nullopt,
                            std::optional<int> expected_feature_dim = std::nullopt);

}  // namespace miso
