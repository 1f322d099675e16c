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

// From-scratch computation of K = A^T C A, its inverse and the redundancy
// matrix R = I - A K^-1 A^T C. These are also the reference results every
// update is checked against.

#ifndef REDMX_REDUNDANCY_HPP_
#define REDMX_REDUNDANCY_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "redmx/model.hpp"
#include "redmx/square_matrix.hpp"

namespace redmx {

inline constexpr double kZeroRedundancy = 1e-9;

Eigen::MatrixXd compute_stiffness(const SystemMatrices& sys);

/// Inverse through a Cholesky factorization. Throws NotPositiveDefinite when
/// a pivot falls below n * eps * max(diag K).
Eigen::MatrixXd invert_stiffness(Eigen::MatrixXd stiffness, OpCounter* counter = nullptr);

Eigen::MatrixXd compute_redundancy(const SystemMatrices& sys,
                                   const Eigen::MatrixXd& stiffness_inverse);

/// Same as compute_redundancy, written into `out` (resized to n_q).
void compute_redundancy_into(const SystemMatrices& sys,
                             const Eigen::MatrixXd& stiffness_inverse,
                             GrowableSquareMatrix& out, OpCounter* counter = nullptr);

/// The live (A, C, K^-1, R) quadruple.
struct SystemState {
  SystemMatrices sys;
  Eigen::MatrixXd stiffness_inverse;
  GrowableSquareMatrix redundancy;
  std::uint64_t generation = 0;
  std::uint64_t updates_since_refresh = 0;

  static SystemState build(SystemMatrices sys, OpCounter* counter = nullptr);

  /// Recomputes K^-1 and R from A and C.
  void refresh(OpCounter* counter = nullptr);

  Index dofs() const { return sys.dofs(); }
  Index rows() const { return sys.rows(); }
};

struct LoadCase {
  Eigen::VectorXd loads;             // f, length n
  Eigen::VectorXd pre_deformations;  // e0, length n_q
};

struct SolveResult {
  Eigen::VectorXd displacements;          // d
  Eigen::VectorXd elastic_deformations;   // e_el = A d - e0
};

/// d = K^-1 (f + A^T C e0). With f = 0, -e_el = R e0.
SolveResult solve(const SystemMatrices& sys, const Eigen::MatrixXd& stiffness_inverse,
                  const LoadCase& load);

struct ElementRedundancy {
  std::size_t position = 0;
  int id = 0;
  Index modes = 0;
  double redundancy = 0.0;  // sum of the element's diagonal entries
  bool zero = false;
};

struct RedundancyReport {
  std::vector<ElementRedundancy> elements;
  Eigen::VectorXd diagonal;
  double trace = 0.0;
  Index static_indeterminacy = 0;  // n_q - n
  Index modes = 0;                 // n_q
  Index dofs = 0;                  // n
  std::uint64_t generation = 0;
  std::vector<int> zero_redundancy_ids;
};

RedundancyReport make_report(const SystemState& state);

/// Relative Frobenius deviations of a state from recomputation. The
/// redundancy deviation divides by max(1, ||R||_F).
struct OracleDeviation {
  double redundancy = 0.0;
  double stiffness_inverse = 0.0;
  double trace = 0.0;  // |trace(R) - (n_q - rank A)|
};

OracleDeviation oracle_deviation(const SystemState& state);

/// Throws OracleMismatch when any deviation exceeds the tolerances.
void verify_against_oracle(const SystemState& state, double relative = 1e-9,
                           double trace = 1e-8);

}  // namespace redmx

#endif  // REDMX_REDUNDANCY_HPP_
