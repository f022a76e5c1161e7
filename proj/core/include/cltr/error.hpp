/*
 * Copyright 2026 The CLTR Robustness Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CLTR_ERROR_HPP_
#define CLTR_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cltr {

// Root of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A precondition on an argument was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite update. `step()` is the failing step.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& message, long step)
      : Error("step " + std::to_string(step) + ": " + message), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// Propensity estimation could not run (e.g. empty click log).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent experiment or training configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Inc/nInc is undefined for the given production ranker and skyline.
class MetricUndefinedError : public Error {
 public:
  using Error::Error;
};

}  // namespace cltr

#endif  // CLTR_ERROR_HPP_
