// rnntep/error.h
//
// Copyright 2026  The rnntep Authors
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

#ifndef RNNTEP_ERROR_H_
#define RNNTEP_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rnntep {

enum class ErrorKind {
  kUsage,     // precondition violated by the caller
  kConfig,    // invalid configuration value
  kShape,     // dimension mismatch
  kLoss,      // likelihood is zero / undefined
  kTraining,  // non-finite values during optimisation
  kDecode,    // search failure
  kIo,        // file system or format problem
};

std::string_view ErrorKindName(ErrorKind kind);

// Every failure raised by the library carries a kind and a component tag so
// the CLI can print "error[kind] component: message" and tests can match on
// the kind instead of on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string component, const std::string &message);

  ErrorKind kind() const { return kind_; }
  const std::string &component() const { return component_; }
  const std::string &message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string component_;
  std::string message_;
};

[[noreturn]] void Fail(ErrorKind kind, std::string component,
                       const std::string &message);

}  // namespace rnntep

#endif  // RNNTEP_ERROR_H_
