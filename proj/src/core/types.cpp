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

#include "miso/core/types.hpp"

#include <string>

#include "miso/core/error.hpp"

namespace miso {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::regression: return "regression";
    case LossKind::multi_output: return "multi_output";
    case LossKind::pairwise: return "pairwise";
    case LossKind::wta: return "wta";
    case LossKind::mix: return "mix";
  }
  return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
  for (auto k : {LossKind::regression, LossKind::multi_output, LossKind::pairwise, LossKind::wta, LossKind::mix})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown loss kind '" + std::string(name) + "'");
}

}  // namespace miso
