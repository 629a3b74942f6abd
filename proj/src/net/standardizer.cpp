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

#include "miso/net/standardizer.hpp"

#include "miso/core/error.hpp"

namespace miso {

Standardizer Standardizer::fit(const Matrix& samples) {
  if (samples.cols() == 0) throw Error("Standardizer::fit: no samples");
  Standardizer s;
  const double count = static_cast<double>(samples.cols());
  s.mean = samples.rowwise().sum() / count;
  const Matrix centered = samples.colwise() - s.mean;
  s.std = (centered.cwiseAbs2().rowwise().sum() / count).cwiseSqrt();
  for (Eigen::Index i = 0; i < s.std.size(); ++i)
    if (!(s.std[i] > 1e-12)) s.std[i] = 1.0;
  return s;
}

Matrix Standardizer::apply(const Matrix& samples) const {
  return (samples.colwise() - mean).array().colwise() / std.array();
}

}  // namespace miso
