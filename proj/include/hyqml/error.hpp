// Copyright 2026 The hyqml Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace hyqml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    /// Short machine-readable class name, used in failure rows of sweep CSVs.
    [[nodiscard]] virtual const char *kind() const noexcept { return "error"; }
};

/// Invalid sizes, shapes or caps in a configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override {
        return "config";
    }
};

/// Wire, class or worker index out of range.
class IndexError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override {
        return "index";
    }
};

/// Non-finite numeric input.
class NumericError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override {
        return "numeric";
    }
};

/// Bad user-provided data (labels, empty sets, sizes).
class InputError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] const char *kind() const noexcept override {
        return "input";
    }
};

class ParseError : public Error {
  public:
    ParseError(const std::string &what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const char *kind() const noexcept override {
        return "parse";
    }

  private:
    std::size_t line_;
};

/// Data-parallel training stopped; carries the id of the worker that failed.
class TrainingAborted : public Error {
  public:
    TrainingAborted(const std::string &what, std::size_t worker)
        : Error("worker " + std::to_string(worker) + ": " + what),
          worker_(worker) {}

    [[nodiscard]] std::size_t worker() const noexcept { return worker_; }
    [[nodiscard]] const char *kind() const noexcept override {
        return "aborted";
    }

  private:
    std::size_t worker_;
};

} // namespace hyqml
