// Copyright 2026 The latentplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace latentplan {

/// Bad settings, unsupported labels, invalid flag combinations. Maps to CLI
/// exit code 1.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unreadable/unparseable files, shape mismatches, missing artifacts. Maps to
/// CLI exit code 2.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A statistical fit could not be completed (degenerate input, rank
/// deficiency). Maps to CLI exit code 2.
class FitError : public std::runtime_error {
public:
  explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training diverged or produced non-finite values. Maps to CLI exit code 2.
class TrainError : public std::runtime_error {
public:
  explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace latentplan
