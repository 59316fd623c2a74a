// Copyright 2026 The bevkit Authors
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

#ifndef BEVKIT_ERROR_HPP_
#define BEVKIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace bevkit
{

enum class ErrorCode
{
  kInvalidArgument,
  kShapeMismatch,
  kOutOfRange,
  kFileNotFound,
  kMalformedInput,
  kIo,
};

/// Exception type thrown by every bevkit operation. The code lets front ends
/// (the CLI in particular) map failures onto distinct exit statuses.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string & what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string & what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string & what)
{
  if (!condition) {
    fail(code, what);
  }
}

}  // namespace bevkit

#endif  // BEVKIT_ERROR_HPP_
