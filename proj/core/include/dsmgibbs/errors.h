/* Copyright 2026 The dsmgibbs Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DSMGIBBS_ERRORS_H_
#define DSMGIBBS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dsmgibbs {

// Base of every error raised by the library. The CLI maps each subclass to a
// distinct process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad shapes, violated preconditions, malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. `line` is 1-based, 0 when not applicable.
class ParseError : public IoError {
 public:
  ParseError(const std::string& what, int line)
      : IoError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Non-finite values, divergence guards.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The model lacks an operation the caller asked for (e.g. a full Hessian from
// a raw score network).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsmgibbs

#endif  // DSMGIBBS_ERRORS_H_
