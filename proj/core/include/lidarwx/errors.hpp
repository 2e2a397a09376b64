// Copyright 2026 The lidarwx Authors
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

#ifndef LIDARWX__ERRORS_HPP_
#define LIDARWX__ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lidarwx
{

/// Malformed binary input (cloud files).
class FormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries the 1-based line number, 0 when not line-bound.
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string & what, std::size_t line)
  : std::runtime_error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Persisted bank does not agree with its index.
class IntegrityError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument combination.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lidarwx

#endif  // LIDARWX__ERRORS_HPP_
