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

#include "redmx/redundancy.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "redmx/errors.hpp"
#include "redmx/fixtures.hpp"
#include "redmx/scalable.hpp"
#include "support/random_models.hpp"

namespace redmx {
namespace {

using testing::dense_redundancy;
using testing::max_abs;

Eigen::MatrixXd redundancy_of(const SystemMatrices& sys) {
  return compute_redundancy(sys, invert_stiffness(compute_stiffness(sys)));
}

SystemMatrices one_by_one(double c) {
  SystemMatrices sys(1);
  sys.append(ElementBlock::from_dense(Eigen::MatrixXd::Constant(1, 1, 1.0),
                                      Eigen::VectorXd::Constant(1, c)));
  return sys;
}

TEST(Stiffness, ScalarCase) {
  const Eigen::MatrixXd k = compute_stiffness(one_by_one(7.5));
  ASSERT_EQ(k.rows(), 1);
  EXPECT_DOUBLE_EQ(k(0, 0), 7.5);
}

TEST(Stiffness, SystemAMatchesTripleProduct) {
  const SystemMatrices sys = fixtures::system_a();
  const Eigen::MatrixXd a = sys.dense_compatibility();
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(a.cols(), a.cols());
  for (Index i = 0; i < a.cols(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      for (Index r = 0; r < a.rows(); ++r) oracle(i, j) += a(r, i) * sys.material()[r] * a(r, j);
    }
  }
  const Eigen::MatrixXd k = compute_stiffness(sys);
  ASSERT_EQ(k.rows(), 4);
  EXPECT_LE(max_abs(k - oracle), 1e-12);
  EXPECT_EQ(k, k.transpose());
}

TEST(Stiffness, SystemBIsSystemAPlusBraceOuterProduct) {
  const ElementBlock brace = fixtures::brace();
  const Eigen::MatrixXd a = Eigen::MatrixXd(brace.rows);
  const Eigen::MatrixXd expected =
      compute_stiffness(fixtures::system_a()) + a.transpose() * brace.stiffness[0] * a;
  EXPECT_LE(max_abs(compute_stiffness(fixtures::system_b()) - expected), 1e-12);
}

TEST(InvertStiffness, Identity) {
  EXPECT_EQ(invert_stiffness(Eigen::MatrixXd::Identity(3, 3)), Eigen::MatrixXd::Identity(3, 3));
}

TEST(InvertStiffness, Diagonal) {
  Eigen::MatrixXd k = Eigen::Vector2d(2.0, 4.0).asDiagonal();
  const Eigen::MatrixXd inv = invert_stiffness(k);
  EXPECT_DOUBLE_EQ(inv(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(inv(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(inv(0, 1), 0.0);
}

TEST(InvertStiffness, SystemAResidual) {
  const Eigen::MatrixXd k = compute_stiffness(fixtures::system_a());
  const Eigen::MatrixXd inv = invert_stiffness(k);
  EXPECT_LE(max_abs(k * inv - Eigen::MatrixXd::Identity(4, 4)), 1e-10);
}

TEST(InvertStiffness, SingularRejected) {
  Eigen::MatrixXd k(2, 2);
  k << 1, 1, 1, 1;
  EXPECT_THROW(invert_stiffness(k), NotPositiveDefinite);
  k << 1, 0, 0, -1;
  EXPECT_THROW(invert_stiffness(k), NotPositiveDefinite);
}

TEST(InvertStiffness, CountsOperations) {
  OpCounter counter;
  invert_stiffness(compute_stiffness(fixtures::system_a()), &counter);
  EXPECT_GT(counter.ops, 0u);
}

TEST(ComputeRedundancy, PrintedMatrices) {
  EXPECT_LE(max_abs(redundancy_of(fixtures::system_a()) - fixtures::printed_redundancy_a()), 5e-4);
  EXPECT_LE(max_abs(redundancy_of(fixtures::system_b()) - fixtures::printed_redundancy_b()), 5e-4);
  EXPECT_LE(max_abs(redundancy_of(fixtures::system_c()) - fixtures::printed_redundancy_c()), 5e-4);
}

TEST(ComputeRedundancy, MatchesDenseOracle) {
  for (const SystemMatrices& sys :
       {fixtures::system_a(), fixtures::system_b(), assemble_system(generate_frame(2))}) {
    const Eigen::MatrixXd oracle = dense_redundancy(sys.dense_compatibility(), sys.material());
    EXPECT_LE(max_abs(redundancy_of(sys) - oracle), 1e-10);
  }
}

TEST(ComputeRedundancy, StaticallyDeterminateIsZero) {
  SystemMatrices sys(2);
  Eigen::MatrixXd rows(2, 2);
  rows << 1, 0, 0.6, 0.8;
  sys.append(ElementBlock::from_dense(rows.row(0), Eigen::VectorXd::Constant(1, 3.0)));
  sys.append(ElementBlock::from_dense(rows.row(1), Eigen::VectorXd::Constant(1, 5.0)));
  EXPECT_LE(max_abs(redundancy_of(sys)), 1e-14);
}

TEST(ComputeRedundancy, IntoGrowableMatchesDense) {
  const SystemMatrices sys = fixtures::system_b();
  const Eigen::MatrixXd inv = invert_stiffness(compute_stiffness(sys));
  GrowableSquareMatrix out;
  compute_redundancy_into(sys, inv, out);
  EXPECT_LE(max_abs(out.to_dense() - compute_redundancy(sys, inv)), 1e-15);
}

TEST(ComputeRedundancy, DeterministicAndPermutationCovariant) {
  testing::Rng rng(11);
  const StructuralModel model = testing::random_model(rng, testing::ModelFamily::Truss2d, 40);
  const SystemMatrices sys = assemble_system(model);
  const Eigen::MatrixXd r = redundancy_of(sys);
  EXPECT_EQ(r, redundancy_of(assemble_system(model)));

  // Relabel the elements with a random permutation of ids; assembly stacks by id.
  StructuralModel shuffled = model;
  std::vector<int> ids(model.elements.size());
  std::iota(ids.begin(), ids.end(), 1);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<int> old_ids;
  for (std::size_t e = 0; e < shuffled.elements.size(); ++e) {
    old_ids.push_back(shuffled.elements[e].id);
    shuffled.elements[e].id = ids[e];
  }
  const SystemMatrices permuted = assemble_system(shuffled);
  const Eigen::MatrixXd rp = redundancy_of(permuted);
  // Row of an old id in each system (all truss: one row per element).
  std::vector<Index> where(sys.element_count());
  for (std::size_t e = 0; e < shuffled.elements.size(); ++e) {
    where[sys.position_of(old_ids[e])] = static_cast<Index>(permuted.position_of(ids[e]));
  }
  double worst = 0.0;
  for (Index i = 0; i < r.rows(); ++i) {
    for (Index j = 0; j < r.cols(); ++j) {
      worst = std::max(worst, std::abs(r(i, j) - rp(where[i], where[j])));
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Solve, ZeroLoadGivesZero) {
  const SystemMatrices sys = fixtures::system_a();
  const Eigen::MatrixXd inv = invert_stiffness(compute_stiffness(sys));
  const SolveResult r =
      solve(sys, inv, {Eigen::VectorXd::Zero(sys.dofs()), Eigen::VectorXd::Zero(sys.rows())});
  EXPECT_EQ(r.displacements, Eigen::VectorXd::Zero(sys.dofs()));
  EXPECT_EQ(r.elastic_deformations, Eigen::VectorXd::Zero(sys.rows()));
}

TEST(Solve, PreDeformationResponseIsRedundancyTimesE0) {
  const SystemMatrices sys = fixtures::system_a();
  const Eigen::MatrixXd inv = invert_stiffness(compute_stiffness(sys));
  Eigen::VectorXd e0(5);
  e0 << 0.3, -1.2, 0.7, 2.5, -0.4;
  const SolveResult r = solve(sys, inv, {Eigen::VectorXd::Zero(sys.dofs()), e0});

  // Independent route: solve K d = A^T C e0 by LU, then e_el = A d - e0.
  const Eigen::MatrixXd a = sys.dense_compatibility();
  const Eigen::MatrixXd c = sys.material().asDiagonal();
  const Eigen::VectorXd d = (a.transpose() * c * a).fullPivLu().solve(a.transpose() * c * e0);
  const Eigen::VectorXd e_el = a * d - e0;
  EXPECT_LE((r.displacements - d).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((-e_el - dense_redundancy(a, sys.material()) * e0).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((-r.elastic_deformations - redundancy_of(sys) * e0).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Solve, StaticallyDeterminateHasNoElasticDeformation) {
  SystemMatrices sys(2);
  Eigen::MatrixXd rows(2, 2);
  rows << 1, 0, 0.6, 0.8;
  sys.append(ElementBlock::from_dense(rows.row(0), Eigen::VectorXd::Constant(1, 3.0)));
  sys.append(ElementBlock::from_dense(rows.row(1), Eigen::VectorXd::Constant(1, 5.0)));
  const Eigen::MatrixXd inv = invert_stiffness(compute_stiffness(sys));
  const SolveResult r = solve(sys, inv, {Eigen::VectorXd::Zero(2), Eigen::Vector2d(1.5, -2.0)});
  EXPECT_LE(r.elastic_deformations.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Report, SystemA) {
  const RedundancyReport rep = make_report(SystemState::build(fixtures::system_a()));
  ASSERT_EQ(rep.elements.size(), 5u);
  EXPECT_NEAR(rep.elements[1].redundancy, 0.586, 5e-4);
  EXPECT_NEAR(rep.trace, 1.0, 3e-3);
  EXPECT_EQ(rep.static_indeterminacy, 1);
  EXPECT_EQ(rep.modes, 5);
  EXPECT_EQ(rep.dofs, 4);
  EXPECT_TRUE(rep.elements[0].zero);
  EXPECT_FALSE(rep.elements[1].zero);
}

TEST(Report, SystemCFlagsElementTwo) {
  const SystemState state = SystemState::build(fixtures::system_c());
  const RedundancyReport rep = make_report(state);
  EXPECT_NEAR(rep.elements[1].redundancy, 0.0, 1e-9);
  EXPECT_TRUE(rep.elements[1].zero);
  const int id = state.sys.elements()[1].id;
  EXPECT_NE(std::find(rep.zero_redundancy_ids.begin(), rep.zero_redundancy_ids.end(), id),
            rep.zero_redundancy_ids.end());
}

TEST(Report, SystemBTrace) {
  const RedundancyReport rep = make_report(SystemState::build(fixtures::system_b()));
  EXPECT_NEAR(rep.trace, 2.0, 3e-3);
  EXPECT_EQ(rep.static_indeterminacy, 2);
}

TEST(Report, BeamElementsSumTheirModes) {
  const SystemState state = SystemState::build(assemble_system(generate_frame(2)));
  const RedundancyReport rep = make_report(state);
  double total = 0.0;
  for (const auto& e : rep.elements) {
    const RowRange r = state.sys.row_range(e.position);
    EXPECT_EQ(e.modes, r.count);
    EXPECT_NEAR(e.redundancy, rep.diagonal.segment(r.offset, r.count).sum(), 1e-15);
    total += e.redundancy;
  }
  EXPECT_NEAR(total, rep.trace, 1e-10);
}

void expect_invariants(const Eigen::MatrixXd& r, Index n_s) {
  const Index n_q = r.rows();
  EXPECT_NEAR(r.trace(), static_cast<double>(n_s), 1e-8);
  EXPECT_LE(max_abs(r * r - r), 1e-8 * static_cast<double>(n_q));
  EXPECT_GE(r.diagonal().minCoeff(), -1e-9);
  EXPECT_LE(r.diagonal().maxCoeff(), 1.0 + 1e-9);
}

TEST(Invariants, Fixtures) {
  expect_invariants(redundancy_of(fixtures::system_a()), 1);
  expect_invariants(redundancy_of(fixtures::system_b()), 2);
  expect_invariants(redundancy_of(fixtures::system_c()), 1);
}

TEST(Invariants, RandomModels) {
  testing::Rng rng(5);
  for (int i = 0; i < 12; ++i) {
    const SystemMatrices sys = assemble_system(testing::random_model(rng, 120));
    expect_invariants(redundancy_of(sys), check_kinematic_determinacy(sys));
  }
}

TEST(Oracle, FreshStateHasNoDeviation) {
  const SystemState state = SystemState::build(assemble_system(generate_frame(3)));
  const OracleDeviation d = oracle_deviation(state);
  EXPECT_EQ(d.redundancy, 0.0);
  EXPECT_EQ(d.stiffness_inverse, 0.0);
  EXPECT_LE(d.trace, 1e-8);
  EXPECT_NO_THROW(verify_against_oracle(state));
}

TEST(Oracle, CorruptedStateIsDetected) {
  SystemState state = SystemState::build(fixtures::system_a());
  state.redundancy(1, 2) += 1e-6;
  EXPECT_THROW(verify_against_oracle(state), OracleMismatch);
}

TEST(SystemState, BuildAndRefresh) {
  SystemState state = SystemState::build(fixtures::system_b());
  EXPECT_EQ(state.generation, 0u);
  const Eigen::MatrixXd before = state.redundancy.to_dense();
  state.redundancy(0, 0) = 42.0;
  state.updates_since_refresh = 7;
  state.refresh();
  EXPECT_EQ(state.redundancy.to_dense(), before);
  EXPECT_EQ(state.updates_since_refresh, 0u);
}

TEST(SystemState, KinematicallyIndeterminateRejected) {
  SystemMatrices sys(2);
  sys.append(ElementBlock::from_dense(Eigen::RowVector2d(1.0, 0.0), Eigen::VectorXd::Ones(1)));
  EXPECT_THROW(SystemState::build(sys), Error);
}

}  // namespace
}  // namespace redmx
