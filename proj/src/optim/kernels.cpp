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

#include "miso/parallel/kernels.hpp"

#include <random>

#include "miso/core/rng.hpp"

namespace miso::kernels {

std::vector<double> rollout_costs(const ControlProblem& problem, std::span<const ControlSequence> sequences,
                                  Exec exec) {
  std::vector<double> costs(sequences.size());
  for_each_index(exec, sequences.size(), [&](std::size_t k) { costs[k] = problem.cost_or_inf(sequences[k]); });
  return costs;
}

std::vector<ControlSequence> perturb(const ControlSequence& u, int count, const Vector& sigma,
                                     std::uint64_t seed, Exec exec) {
  std::vector<ControlSequence> out(static_cast<std::size_t>(count));
  for_each_index(exec, out.size(), [&](std::size_t k) {
    Rng rng = make_rng(derive_seed(seed, k));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix noisy = u.controls;
    for (Eigen::Index t = 0; t < noisy.rows(); ++t)
      for (Eigen::Index j = 0; j < noisy.cols(); ++j) noisy(t, j) += sigma[j] * normal(rng);
    out[k] = ControlSequence(std::move(noisy));
  });
  return out;
}

}  // namespace miso::kernels
