// Copyright 2026 The Flow Authors
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

namespace flow {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kValidation,
  kStateTransition,
  kMissingKey,
  kPlanning,
  kTransport,
  kProtocol,
  kAuth,
  kIo,
};

// Base of every exception thrown by the engine. The code is what crosses the
// C boundary; the message is what a human reads.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define FLOW_DEFINE_ERROR(Name, Code)                                \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(Code, what) {}    \
  };

FLOW_DEFINE_ERROR(InvalidArgument, ErrorCode::kInvalidArgument)
FLOW_DEFINE_ERROR(ParseError, ErrorCode::kParse)
FLOW_DEFINE_ERROR(ValidationError, ErrorCode::kValidation)
FLOW_DEFINE_ERROR(StateTransitionError, ErrorCode::kStateTransition)
FLOW_DEFINE_ERROR(MissingKeyError, ErrorCode::kMissingKey)
FLOW_DEFINE_ERROR(PlanningError, ErrorCode::kPlanning)
FLOW_DEFINE_ERROR(TransportError, ErrorCode::kTransport)
FLOW_DEFINE_ERROR(ProtocolError, ErrorCode::kProtocol)
FLOW_DEFINE_ERROR(AuthError, ErrorCode::kAuth)
FLOW_DEFINE_ERROR(IoError, ErrorCode::kIo)

#undef FLOW_DEFINE_ERROR

}  // namespace flow
