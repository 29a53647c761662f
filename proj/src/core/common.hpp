// Copyright 2026 The Hacomp Authors. All Rights Reserved.
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

#ifndef HACOMP_CORE_COMMON_H_
#define HACOMP_CORE_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hacomp {

// All errors surfaced by the library. Messages name the offending
// dimension/parameter so callers can report without re-deriving context.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Subclasses map onto the CLI exit-code taxonomy: bad configuration (2),
// unreadable or malformed data (3), numerical aborts (4).
class ConfigError : public Error {
 public:
  using Error::Error;
};
class DataError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] inline void Fail(const std::string& msg) { throw Error(msg); }
[[noreturn]] inline void FailConfig(const std::string& msg) { throw ConfigError(msg); }
[[noreturn]] inline void FailData(const std::string& msg) { throw DataError(msg); }
[[noreturn]] inline void FailNumeric(const std::string& msg) { throw NumericError(msg); }

inline void Check(bool cond, const std::string& msg) {
  if (!cond) Fail(msg);
}
inline void CheckConfig(bool cond, const std::string& msg) {
  if (!cond) FailConfig(msg);
}
inline void CheckData(bool cond, const std::string& msg) {
  if (!cond) FailData(msg);
}

}  // namespace hacomp

#endif  // HACOMP_CORE_COMMON_H_
