// Copyright 2026 The Redmx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "redmx/errors.hpp"

#include <sstream>
#include <utility>

namespace redmx {

namespace {

std::string positioned(const std::string& message, int line, int column) {
  std::ostringstream out;
  out << "line " << line << ", column " << column << ": " << message;
  return out.str();
}

std::string removal_message(const std::vector<int>& ids, double rcond) {
  std::ostringstream out;
  out << "element";
  if (ids.size() > 1) out << 's';
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? ", " : " ") << ids[i];
  out << (ids.size() > 1 ? " form" : " is")
      << " a statically determinate part; removal would leave the structure "
         "kinematically indeterminate (gate rcond "
      << rcond << ")";
  return out.str();
}

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column)
    : Error(positioned(message, line, column)), line_(line), column_(column) {}

RankDeficient::RankDeficient(std::ptrdiff_t rank, std::ptrdiff_t dofs)
    : Error("compatibility matrix has rank " + std::to_string(rank) +
            " < " + std::to_string(dofs) +
            " degrees of freedom; structure is kinematically indeterminate"),
      rank_(rank),
      dofs_(dofs) {}

GateSingular::GateSingular(const std::string& message, double rcond)
    : Error(message), rcond_(rcond) {}

StaticallyDeterminateRemoval::StaticallyDeterminateRemoval(
    std::vector<std::size_t> positions, std::vector<int> ids, double rcond)
    : Error(removal_message(ids, rcond)),
      positions_(std::move(positions)),
      ids_(std::move(ids)),
      rcond_(rcond) {}

}  // namespace redmx
