// Copyright 2026 The scenemix Authors
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

#ifndef SCENEMIX__ERROR_HPP_
#define SCENEMIX__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace scenemix
{

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { missing_input = 2, validation = 3, io = 4 };

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string & what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

struct MissingInputError : Error
{
  explicit MissingInputError(const std::string & what) : Error(ErrorKind::missing_input, what) {}
};

struct ValidationError : Error
{
  explicit ValidationError(const std::string & what) : Error(ErrorKind::validation, what) {}
};

struct IoError : Error
{
  explicit IoError(const std::string & what) : Error(ErrorKind::io, what) {}
};

/// Malformed file contents (wrong size, bad CSV row). Treated as a validation failure.
struct FormatError : ValidationError
{
  explicit FormatError(const std::string & what) : ValidationError(what) {}
};

inline const char * to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::missing_input:
      return "missing_input";
    case ErrorKind::validation:
      return "validation";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

}  // namespace scenemix

#endif  // SCENEMIX__ERROR_HPP_
