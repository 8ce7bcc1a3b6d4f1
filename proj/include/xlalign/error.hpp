// xlalign/error.hpp

// Copyright 2026 The xlalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xlalign {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  usage,    // bad arguments or configuration
  data,     // malformed or unusable input data
  service,  // external translation service failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string &what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string &what) : Error(ErrorKind::data, what) {}
};

class ServiceError : public Error {
 public:
  explicit ServiceError(const std::string &what)
      : Error(ErrorKind::service, what) {}
};

enum class ParseErrorCode {
  malformed_header,
  wrong_arity,
  non_finite,
  empty_vocabulary,
  invalid_word,
  truncated,
  bad_columns,
};

inline const char *to_string(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::malformed_header: return "malformed header";
    case ParseErrorCode::wrong_arity: return "wrong arity";
    case ParseErrorCode::non_finite: return "non-finite value";
    case ParseErrorCode::empty_vocabulary: return "empty vocabulary";
    case ParseErrorCode::invalid_word: return "invalid word";
    case ParseErrorCode::truncated: return "truncated file";
    case ParseErrorCode::bad_columns: return "wrong column count";
  }
  return "parse error";
}

// A file-format error tied to a 1-based line number (0 when not applicable).
class ParseError : public DataError {
 public:
  ParseError(ParseErrorCode code, std::string file, std::size_t line,
             const std::string &detail)
      : DataError(file + ":" + std::to_string(line) + ": " + to_string(code) +
                  (detail.empty() ? "" : ": " + detail)),
        code_(code),
        file_(std::move(file)),
        line_(line) {}

  ParseErrorCode code() const noexcept { return code_; }
  const std::string &file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ParseErrorCode code_;
  std::string file_;
  std::size_t line_;
};

}  // namespace xlalign
