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

#include <cstddef>
#include <exception>
#include <vector>

namespace miso {

/// Execution policy for data-parallel loops. `serial` is the reference path;
/// `parallel` runs the same body under OpenMP. Bodies write only to their own
/// index, so both paths produce identical results.
enum class Exec { serial, parallel };

/// Process-wide default policy and OpenMP thread count.
Exec default_exec();
void set_default_exec(Exec exec);
void set_num_threads(int threads);
int num_threads();

/// Runs body(i) for i in [0, n). Exceptions are captured per index and the one
/// with the lowest index is rethrown after the loop.
template <typename Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace miso
