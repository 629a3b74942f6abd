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
#include <stdexcept>
#include <string>

namespace miso {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or dimensions that do not match the environment.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A rollout produced a non-finite state.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t step)
      : Error("rollout diverged at step " + std::to_string(step)), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Malformed, truncated or incompatible dataset/checkpoint files.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  VersionError(unsigned found, unsigned expected)
      : FormatError("unsupported format version " + std::to_string(found) + " (expected " +
                    std::to_string(expected) + ")"),
        found_(found) {}

  unsigned found() const noexcept { return found_; }

 private:
  unsigned found_;
};

/// File content belongs to a different environment than requested.
class EnvMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace miso
