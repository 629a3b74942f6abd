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

#include "miso/core/types.hpp"

namespace miso {

struct Standardizer {
  Vector mean;
  Vector std;  // strictly positive; constant columns get 1

  /// Population mean/std over the columns of `samples` (dim x count).
  static Standardizer fit(const Matrix& samples);
  Matrix apply(const Matrix& samples) const;
};

}  // namespace miso
