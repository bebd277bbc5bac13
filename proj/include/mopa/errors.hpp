// Copyright 2026 The mopa Authors
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

#ifndef MOPA_ERRORS_HPP
#define MOPA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mopa {

// Base class for all library failures. The CLI maps each subclass onto
// its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

// Invalid configuration file or field. The message names the field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }
  int exit_code() const noexcept override { return 2; }

 private:
  std::string field_;
};

// Precondition violated by an argument passed to a library routine.
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Integration, decomposition or root search failed to meet its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class CalibrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Missing, unreadable or inconsistent archive files.
class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace mopa

#endif  // MOPA_ERRORS_HPP
