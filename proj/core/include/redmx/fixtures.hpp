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

// The plane truss cycle A -> B -> C -> A used throughout the tests.
//
//   A: 4 free DOFs, 5 bars, one redundancy.
//   B: A plus a diagonal brace inserted as element 3.
//   C: B without element 4.
//   Exchanging element 3 of C for the bar removed from B restores A.
//
// The printed_* matrices are the reference three-digit values.

#ifndef REDMX_FIXTURES_HPP_
#define REDMX_FIXTURES_HPP_

#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "redmx/model.hpp"

namespace redmx::fixtures {

inline constexpr std::size_t kBracePosition = 2;     // element 3 of B
inline constexpr std::size_t kRemovedPosition = 3;   // element 4 of B
inline constexpr std::size_t kExchangePosition = 2;  // element 3 of C

SystemMatrices system_a();
SystemMatrices system_b();
SystemMatrices system_c();

/// Geometry reproducing system A: EA = 200, unit grid.
StructuralModel system_a_geometry();

/// The brace added to A (row [-s s 0 0], stiffness 100 sqrt 2).
ElementBlock brace();
/// The bar removed from B and restored by the exchange (row [0 0 0 1], 200).
ElementBlock restored_bar();

Eigen::MatrixXd printed_redundancy_a();
Eigen::MatrixXd printed_redundancy_b();
Eigen::MatrixXd printed_redundancy_c();
/// R after exchanging element 3 of C; printed identical to A.
Eigen::MatrixXd printed_redundancy_cycle();

/// The three-step script A -> B -> C -> A in .rxu form.
std::string cycle_script();

}  // namespace redmx::fixtures

#endif  // REDMX_FIXTURES_HPP_
