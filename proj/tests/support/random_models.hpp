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

// Random kinematically determinate models and random update operations for
// property tests.

#ifndef REDMX_TESTS_SUPPORT_RANDOM_MODELS_HPP_
#define REDMX_TESTS_SUPPORT_RANDOM_MODELS_HPP_

#include <optional>
#include <random>

#include <Eigen/Core>

#include "redmx/model.hpp"
#include "redmx/redundancy.hpp"
#include "redmx/woodbury.hpp"

namespace redmx::testing {

using Rng = std::mt19937_64;

enum class ModelFamily { Truss2d, Truss3d, Frame2d };

/// Jittered grid with a supported bottom layer. Every free node is braced to
/// already stable nodes, then extra members add redundancy. At most
/// `max_elements` elements.
StructuralModel random_model(Rng& rng, ModelFamily family, int max_elements = 200);
StructuralModel random_model(Rng& rng, int max_elements = 200);

/// A random block with `modes` rows over a few DOFs.
ElementBlock random_block(Rng& rng, Index dofs, Index modes);

/// Random admissible-looking update: add (single or blocked), remove of an
/// element with a well-conditioned gate, or exchange (same or mixed mode
/// count). Returns nullopt if nothing suitable was found.
std::optional<UpdateOp> random_update(Rng& rng, const SystemState& state);

/// Exact copy comparison of two states.
bool bitwise_equal(const SystemState& a, const SystemState& b);

/// max |x_ij| / max(1, ...) helpers.
double max_abs(const Eigen::MatrixXd& m);
double relative_frobenius(const Eigen::MatrixXd& value, const Eigen::MatrixXd& reference);
/// ||value - reference||_F / max(1, ||reference||_F). A redundancy matrix has
/// ||R||_F >= 1 unless n_s = 0, where R = 0.
double redundancy_deviation(const Eigen::MatrixXd& value, const Eigen::MatrixXd& reference);

/// Plain dense oracle: R = I - A (A^T C A)^-1 A^T C with a QR-free LU solve.
Eigen::MatrixXd dense_redundancy(const Eigen::MatrixXd& a, const Eigen::VectorXd& c);

}  // namespace redmx::testing

#endif  // REDMX_TESTS_SUPPORT_RANDOM_MODELS_HPP_
