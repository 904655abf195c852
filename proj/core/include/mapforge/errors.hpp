// Copyright 2026 The Mapforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MAPFORGE_ERRORS_HPP_
#define MAPFORGE_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mapforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed record in a canonical problem file. Loading is all-or-nothing,
// so the first offending line aborts the load.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& what)
      : Error("line " + std::to_string(line) + ", field '" + field +
              "': " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Transport failure talking to a model endpoint. Retryable failures are
// re-attempted with exponential backoff; permanent ones fail immediately.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what, bool retryable = true)
      : Error(what), retryable_(retryable) {}

  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

// Replay-mode request whose digest has no cassette entry.
class ReplayMissError : public Error {
 public:
  using Error::Error;
};

// Requested language has no configured toolchain. A configuration error,
// distinct from CompileError which is the candidate program's fault.
class ToolchainMissingError : public Error {
 public:
  using Error::Error;
};

class EmptyScopeError : public Error {
 public:
  using Error::Error;
};

class RoleMismatchError : public Error {
 public:
  using Error::Error;
};

class DomainMismatchError : public Error {
 public:
  using Error::Error;
};

class CoverageMismatchError : public Error {
 public:
  using Error::Error;
};

class ZeroTotalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mapforge

#endif  // MAPFORGE_ERRORS_HPP_
