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

#ifndef REDMX_ERRORS_HPP_
#define REDMX_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace redmx {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid structural model (unknown node, nonpositive modulus, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Syntax or semantic error in a text document, with a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// rank(A) < n: the structure is kinematically indeterminate.
class RankDeficient : public Error {
 public:
  RankDeficient(std::ptrdiff_t rank, std::ptrdiff_t dofs);

  std::ptrdiff_t rank() const { return rank_; }
  std::ptrdiff_t dofs() const { return dofs_; }

 private:
  std::ptrdiff_t rank_;
  std::ptrdiff_t dofs_;
};

/// The stiffness matrix failed the positive-definiteness test.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// The small gate matrix of an update is numerically singular.
class GateSingular : public Error {
 public:
  GateSingular(const std::string& message, double rcond);

  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

/// Removal of a statically determinate part was requested. The positions are
/// 0-based element positions in the current element order.
class StaticallyDeterminateRemoval : public Error {
 public:
  StaticallyDeterminateRemoval(std::vector<std::size_t> positions,
                               std::vector<int> ids, double rcond);

  const std::vector<std::size_t>& positions() const { return positions_; }
  const std::vector<int>& ids() const { return ids_; }
  double rcond() const { return rcond_; }

 private:
  std::vector<std::size_t> positions_;
  std::vector<int> ids_;
  double rcond_;
};

/// An updated state disagrees with recomputation beyond tolerance.
class OracleMismatch : public Error {
 public:
  using Error::Error;
};

/// The benchmark correctness gate rejected the updated state.
class BenchGateFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace redmx

#endif  // REDMX_ERRORS_HPP_
