// Copyright 2026 The provabs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROVABS_ERRORS_HPP
#define PROVABS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace provabs {

enum class ErrorKind {
  Parse,
  Validation,
  UnknownAnnotation,
  LeafNotInDatabase,
  DuplicateAnnotation,
  ArityMismatch,
  SchemaMismatch,
  InvalidAncestor,
  InvalidDistribution,
  CapExceeded,
  AlignmentExplosion,
  InfeasibleSpec,
  InvalidArgument,
  Io,
};

// All domain failures are reported through this single exception type; the
// kind drives exit-code / C-status mapping, detail() carries a count for the
// cap errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, long long detail = 0)
      : std::runtime_error(std::move(message)), kind_(kind), detail_(detail) {}

  ErrorKind kind() const { return kind_; }
  long long detail() const { return detail_; }

 private:
  ErrorKind kind_;
  long long detail_;
};

const char* error_kind_name(ErrorKind kind);

}  // namespace provabs

#endif  // PROVABS_ERRORS_HPP
