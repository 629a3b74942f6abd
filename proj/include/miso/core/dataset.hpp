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
#include <vector>

#include "miso/core/types.hpp"

namespace miso {

inline constexpr char kDatasetMagic[] = "MISODATA";
inline constexpr std::uint32_t kDatasetVersion = 1;

struct DatasetHeader {
  std::uint32_t version = kDatasetVersion;
  EnvId env_id = EnvId::toy1d;
  std::uint32_t horizon = 0;
  std::uint32_t state_dim = 0;
  std::uint32_t control_dim = 0;
  std::uint64_t count = 0;
};

struct Dataset {
  DatasetHeader header;
  std::vector<DatasetRecord> records;
};

/// Writes the framed binary file at `path` and a JSON manifest at `path + ".json"`.
/// All records must share env_id and shapes. An empty record list needs the
/// shape supplied explicitly.
void dataset_write(const std::string& path, const std::vector<DatasetRecord>& records);
void dataset_write(const std::string& path, const DatasetHeader& shape,
                   const std::vector<DatasetRecord>& records);

/// Reads a dataset. Throws VersionError, FormatError (bad magic / truncation)
/// or EnvMismatchError when `expected_env` is given and differs.
Dataset dataset_read(const std::string& path, std::optional<EnvId> expected_env = std::nullopt);

std::vector<char> dataset_encode(const DatasetHeader& shape, const std::vector<DatasetRecord>& records);
Dataset dataset_decode(const std::vector<char>& bytes, std::optional<EnvId> expected_env = std::nullopt);

}  // namespace miso
