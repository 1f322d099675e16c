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

// Low-rank updates of (A, C, K^-1, R) when elements are added, removed or
// exchanged. Every update costs O(n_q^2) per updated mode. All admissibility
// checks run before the state is touched, so a throwing update leaves the
// state unchanged.

#ifndef REDMX_WOODBURY_HPP_
#define REDMX_WOODBURY_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "redmx/model.hpp"
#include "redmx/redundancy.hpp"

namespace redmx {

inline constexpr double kGateThreshold = 1e-12;

/// Row indices into the current n_q rows, strictly increasing.
struct RowSelection {
  std::vector<Index> rows;

  static RowSelection of(const SystemMatrices& sys, std::span<const std::size_t> positions);
  Index size() const { return static_cast<Index>(rows.size()); }
};

struct UpdateGate {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd inverse;  // empty when the gate is singular
  double rcond = 0.0;

  bool admissible(double threshold = kGateThreshold) const { return rcond >= threshold; }
};

struct InverseUpdate {
  Eigen::MatrixXd inverse;       // (M - U V^T)^-1
  Eigen::MatrixXd intermediate;  // M^-1 U
};

/// (M - U V^T)^-1 = M^-1 + M^-1 U (I - V^T M^-1 U)^-1 V^T M^-1.
/// Throws GateSingular when the LU rcond of I - V^T M^-1 U is below threshold.
InverseUpdate woodbury_update_inverse(const Eigen::MatrixXd& inverse, const Eigen::MatrixXd& u,
                                      const Eigen::MatrixXd& v,
                                      double threshold = kGateThreshold);

/// `enabled` turns on the periodic refresh every `interval` updates. A
/// removal or exchange whose gate rcond falls below `gate_rcond` amplifies
/// the rounding error already in K^-1 and R by about 1/rcond; the state is
/// then refreshed right after the update. 0 disables that trigger.
struct DriftPolicy {
  bool enabled = false;
  std::uint64_t interval = 1000;
  double gate_rcond = 1e-2;
};

struct UpdateOptions {
  OpCounter* counter = nullptr;
  double gate_threshold = kGateThreshold;
  DriftPolicy drift;
};

/// Inserts the blocks, in order, before element `position` (default: after
/// the last element). Blocks with id 0 receive fresh ids, written back.
void update_add(SystemState& state, std::span<ElementBlock> blocks,
                std::optional<std::size_t> position = std::nullopt,
                const UpdateOptions& options = {});
int update_add(SystemState& state, ElementBlock block,
               std::optional<std::size_t> position = std::nullopt,
               const UpdateOptions& options = {});

/// Removes the elements at the given positions in one step. Throws
/// StaticallyDeterminateRemoval when their combined gate is singular.
void update_remove(SystemState& state, std::span<const std::size_t> positions,
                   const UpdateOptions& options = {});
void update_remove(SystemState& state, std::size_t position, const UpdateOptions& options = {});

/// Replaces the element at `position`. The new element keeps the old id
/// unless block.id is nonzero. A different mode count goes through an add at
/// the same position followed by removal of the old element. Throws
/// GateSingular if the result would be kinematically indeterminate.
void update_exchange(SystemState& state, std::size_t position, ElementBlock block,
                     const UpdateOptions& options = {});

/// The gate E^T R E of a removal. For a single-mode element this is its
/// redundancy. rcond is that of the symmetric form C_E^1/2 G C_E^-1/2.
UpdateGate removability_gate(const SystemState& state, std::span<const std::size_t> positions);

/// Predicted change of the existing diagonal entries of R if the blocks were
/// added. Leaves the state untouched; every entry is nonnegative.
Eigen::VectorXd delta_add_diagonal(const SystemState& state,
                                   std::span<const ElementBlock> blocks);

struct AddOp {
  std::vector<ElementBlock> blocks;
  std::optional<std::size_t> position;
};

struct RemoveOp {
  std::vector<std::size_t> positions;
};

struct ExchangeOp {
  std::size_t position = 0;
  ElementBlock block;
};

using UpdateOp = std::variant<AddOp, RemoveOp, ExchangeOp>;

void apply(SystemState& state, UpdateOp& op, const UpdateOptions& options = {});

}  // namespace redmx

#endif  // REDMX_WOODBURY_HPP_
