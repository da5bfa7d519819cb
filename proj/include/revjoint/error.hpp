// Copyright 2026 The revjoint Authors. All Rights Reserved.
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

namespace revjoint {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented contract (bad annotation, bad sequence).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A file could not be parsed. Carries the file name and 1-based line.
class ParseError : public DataError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : DataError(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Optimization produced a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace revjoint
