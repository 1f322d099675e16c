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
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/SparseCore>

#include "redmx/errors.hpp"

namespace redmx {

namespace {

constexpr Index kColumnChunk = 256;

}  // namespace

Eigen::MatrixXd compute_stiffness(const SystemMatrices& sys) {
  const SparseRowMatrix& a = sys.compatibility();
  const Eigen::SparseMatrix<double> ca = sys.material().asDiagonal() * a;
  const Eigen::SparseMatrix<double> k = Eigen::SparseMatrix<double>(a.transpose()) * ca;
  Eigen::MatrixXd dense(k);
  // The triple product is symmetric in exact arithmetic; make it bitwise so.
  dense = 0.5 * (dense + dense.transpose()).eval();
  return dense;
}

Eigen::MatrixXd invert_stiffness(Eigen::MatrixXd stiffness, OpCounter* counter) {
  const Index n = stiffness.rows();
  if (n != stiffness.cols()) throw NotPositiveDefinite("stiffness matrix is not square");
  if (n == 0) return stiffness;
  const double scale = stiffness.diagonal().cwiseAbs().maxCoeff();
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(stiffness);
  const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  if (llt.info() != Eigen::Success || !(scale > 0.0)) {
    throw NotPositiveDefinite("stiffness matrix is not positive definite");
  }
  const Eigen::VectorXd pivots = stiffness.diagonal().cwiseAbs2();
  Index worst = 0;
  const double smallest = pivots.minCoeff(&worst);
  if (!(smallest > floor)) {
    std::ostringstream msg;
    msg << "stiffness matrix is numerically singular (pivot " << smallest << " at dof " << worst
        << ", threshold " << floor << ")";
    throw NotPositiveDefinite(msg.str());
  }
  Eigen::MatrixXd inverse = Eigen::MatrixXd::Identity(n, n);
  llt.solveInPlace(inverse);
  const double nd = static_cast<double>(n);
  count(counter, nd * nd * nd / 3.0 + 2.0 * nd * nd * nd);
  return inverse;
}

void compute_redundancy_into(const SystemMatrices& sys,
                             const Eigen::MatrixXd& stiffness_inverse,
                             GrowableSquareMatrix& out, OpCounter* counter) {
  const Index nq = sys.rows();
  const Index n = sys.dofs();
  const SparseRowMatrix& a = sys.compatibility();
  const Eigen::SparseMatrix<double> weighted =
      Eigen::SparseMatrix<double>(a.transpose()) * sys.material().asDiagonal();
  out.resize(nq);
  auto r = out.view();
  Eigen::MatrixXd y(n, std::min(nq, kColumnChunk));
  for (Index j0 = 0; j0 < nq; j0 += kColumnChunk) {
    const Index w = std::min(kColumnChunk, nq - j0);
    y.resize(n, w);
    y.noalias() = stiffness_inverse * weighted.middleCols(j0, w);
    r.middleCols(j0, w).noalias() = -(a * y);
    for (Index j = j0; j < j0 + w; ++j) r(j, j) += 1.0;
  }
  count(counter, 2.0 * static_cast<double>(n) * static_cast<double>(weighted.nonZeros()) +
                     2.0 * static_cast<double>(nq) * static_cast<double>(a.nonZeros()));
}

Eigen::MatrixXd compute_redundancy(const SystemMatrices& sys,
                                   const Eigen::MatrixXd& stiffness_inverse) {
  GrowableSquareMatrix out;
  compute_redundancy_into(sys, stiffness_inverse, out);
  return out.to_dense();
}

SystemState SystemState::build(SystemMatrices sys, OpCounter* counter) {
  SystemState state;
  state.sys = std::move(sys);
  state.refresh(counter);
  state.generation = 0;
  return state;
}

void SystemState::refresh(OpCounter* counter) {
  stiffness_inverse = invert_stiffness(compute_stiffness(sys), counter);
  compute_redundancy_into(sys, stiffness_inverse, redundancy, counter);
  updates_since_refresh = 0;
}

SolveResult solve(const SystemMatrices& sys, const Eigen::MatrixXd& stiffness_inverse,
                  const LoadCase& load) {
  if (load.loads.size() != sys.dofs() || load.pre_deformations.size() != sys.rows()) {
    throw ModelError("load case dimensions do not match the system");
  }
  const SparseRowMatrix& a = sys.compatibility();
  const Eigen::VectorXd weighted = sys.material().cwiseProduct(load.pre_deformations);
  const Eigen::VectorXd rhs = load.loads + a.transpose() * weighted;
  SolveResult result;
  result.displacements = stiffness_inverse * rhs;
  result.elastic_deformations = a * result.displacements - load.pre_deformations;
  return result;
}

RedundancyReport make_report(const SystemState& state) {
  RedundancyReport report;
  const auto r = state.redundancy.view();
  report.diagonal = r.diagonal();
  report.modes = state.rows();
  report.dofs = state.dofs();
  report.static_indeterminacy = report.modes - report.dofs;
  report.generation = state.generation;
  const auto& elements = state.sys.elements();
  report.elements.reserve(elements.size());
  for (std::size_t p = 0; p < elements.size(); ++p) {
    const RowRange range = state.sys.row_range(p);
    ElementRedundancy e;
    e.position = p;
    e.id = elements[p].id;
    e.modes = range.count;
    e.redundancy = report.diagonal.segment(range.offset, range.count).sum();
    e.zero = e.redundancy < kZeroRedundancy;
    if (e.zero) report.zero_redundancy_ids.push_back(e.id);
    report.trace += e.redundancy;
    report.elements.push_back(e);
  }
  return report;
}

OracleDeviation oracle_deviation(const SystemState& state) {
  const SystemState fresh = SystemState::build(state.sys);
  OracleDeviation d;
  // ||R||_F >= 1 whenever n_s >= 1; R = 0 for n_s = 0.
  const double r_norm = std::max(1.0, fresh.redundancy.view().norm());
  const double r_diff = (state.redundancy.view() - fresh.redundancy.view()).norm();
  d.redundancy = r_diff / r_norm;
  const double p_norm = fresh.stiffness_inverse.norm();
  const double p_diff = (state.stiffness_inverse - fresh.stiffness_inverse).norm();
  d.stiffness_inverse = p_norm > 0.0 ? p_diff / p_norm : p_diff;
  const Index ns = state.rows() - numerical_rank(state.sys);
  d.trace = std::abs(state.redundancy.view().trace() - static_cast<double>(ns));
  return d;
}

void verify_against_oracle(const SystemState& state, double relative, double trace) {
  const OracleDeviation d = oracle_deviation(state);
  if (!(d.redundancy <= relative) || !(d.stiffness_inverse <= relative) || !(d.trace <= trace)) {
    std::ostringstream msg;
    msg << "state deviates from recomputation: R " << d.redundancy << ", K^-1 "
        << d.stiffness_inverse << ", trace " << d.trace;
    throw OracleMismatch(msg.str());
  }
}

}  // namespace redmx
