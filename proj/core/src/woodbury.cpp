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

#include "redmx/woodbury.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "redmx/errors.hpp"

namespace redmx {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double dbl(Index v) { return static_cast<double>(v); }

struct Stacked {
  SparseRowMatrix rows;
  VectorXd stiffness;
};

Stacked stack(std::span<const ElementBlock> blocks, Index dofs) {
  Index m = 0;
  for (const auto& b : blocks) m += b.modes();
  std::vector<Eigen::Triplet<double>> entries;
  Stacked out;
  out.stiffness.resize(m);
  Index row = 0;
  for (const auto& b : blocks) {
    for (Index k = 0; k < b.rows.outerSize(); ++k) {
      for (SparseRowMatrix::InnerIterator it(b.rows, k); it; ++it) {
        entries.emplace_back(row + it.row(), it.col(), it.value());
      }
    }
    out.stiffness.segment(row, b.modes()) = b.stiffness;
    row += b.modes();
  }
  out.rows.resize(m, dofs);
  out.rows.setFromTriplets(entries.begin(), entries.end());
  out.rows.makeCompressed();
  return out;
}

MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void finish(SystemState& state, const UpdateOptions& options, double gate_rcond = 1.0) {
  ++state.generation;
  ++state.updates_since_refresh;
  const bool periodic = options.drift.enabled && options.drift.interval > 0 &&
                        state.updates_since_refresh >= options.drift.interval;
  if (periodic || gate_rcond < options.drift.gate_rcond) state.refresh(options.counter);
}

void check_position(const SystemState& state, std::size_t position) {
  if (position >= state.sys.element_count()) {
    throw ModelError("element position " + std::to_string(position + 1) + " out of range (" +
                     std::to_string(state.sys.element_count()) + " elements)");
  }
}

// Everything needed to add a stacked block, computed without mutation.
struct AddPlan {
  Stacked added;
  MatrixXd u;  // K^-1 a~^T
  MatrixXd s;  // a~ K^-1 a~^T
  MatrixXd w;  // (c~^-1 + S)^-1 = c~ G^-1
  MatrixXd v;  // A K^-1 a~^T
  double rcond = 0.0;
};

AddPlan plan_add(const SystemState& state, std::span<const ElementBlock> blocks,
                 const UpdateOptions& options) {
  if (blocks.empty()) throw ModelError("add requires at least one element block");
  const Index n = state.dofs();
  std::set<int> ids;
  for (const auto& e : state.sys.elements()) ids.insert(e.id);
  for (const auto& b : blocks) {
    b.validate(n);
    if (b.id != 0 && !ids.insert(b.id).second) {
      throw ModelError("element id " + std::to_string(b.id) + " already exists");
    }
  }
  AddPlan plan;
  plan.added = stack(blocks, n);
  const SparseRowMatrix& a = plan.added.rows;
  const VectorXd& c = plan.added.stiffness;
  const Index m = a.rows();

  plan.u.noalias() = state.stiffness_inverse * a.transpose();
  plan.s = symmetrized(a * plan.u);
  const VectorXd root = c.cwiseSqrt();
  const MatrixXd gate = MatrixXd::Identity(m, m) + root.asDiagonal() * plan.s * root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gate, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  plan.rcond = hi > 0.0 ? lo / hi : 0.0;
  if (!std::isfinite(plan.rcond) || plan.rcond < options.gate_threshold) {
    throw GateSingular("add gate is numerically singular", plan.rcond);
  }
  const MatrixXd inner = gate.llt().solve(MatrixXd(root.asDiagonal()));
  plan.w = symmetrized(root.asDiagonal() * inner);
  plan.v.noalias() = state.sys.compatibility() * plan.u;

  const double nnz = dbl(a.nonZeros());
  count(options.counter, 2.0 * dbl(n) * nnz + 2.0 * dbl(m) * nnz +
                             2.0 * dbl(state.sys.compatibility().nonZeros()) * dbl(m));
  return plan;
}

void commit_add(SystemState& state, AddPlan& plan, std::span<ElementBlock> blocks,
                std::size_t position, const UpdateOptions& options) {
  const Index n = state.dofs();
  const Index nq = state.rows();
  const Index m = plan.added.rows.rows();
  const Index at = position == state.sys.element_count() ? nq : state.sys.row_range(position).offset;
  const VectorXd c_old = state.sys.material();
  const VectorXd& c_new = plan.added.stiffness;

  state.sys.insert(position, blocks);

  state.stiffness_inverse.noalias() -= (plan.u * plan.w) * plan.u.transpose();

  const Index size = nq + m;
  MatrixXd x(size, m);
  x.topRows(at) = plan.v.topRows(at);
  x.middleRows(at, m) = plan.s;
  x.bottomRows(nq - at) = plan.v.bottomRows(nq - at);
  const VectorXd& c_all = state.sys.material();
  const MatrixXd z = c_all.asDiagonal() * (x * plan.w);

  state.redundancy.insert(at, m);
  auto r = state.redundancy.view();
  for (Index j = 0; j < size; ++j) {
    auto col = r.col(j);
    if (j >= at && j < at + m) {
      const Index k = j - at;
      col.head(at) = -plan.v.col(k).head(at) * c_new[k];
      col.segment(at, m) = -plan.s.col(k) * c_new[k];
      col[at + k] += 1.0;
      col.tail(nq - at) = -plan.v.col(k).tail(nq - at) * c_new[k];
    } else {
      const Index old = j < at ? j : j - m;
      col.segment(at, m) = -plan.v.row(old).transpose() * c_old[old];
    }
    col.noalias() += x * z.row(j).transpose();
  }
  count(options.counter, 2.0 * dbl(n) * dbl(n) * dbl(m) + 2.0 * dbl(n) * dbl(m) * dbl(m) +
                             2.0 * dbl(size) * dbl(size) * dbl(m));
}

struct RemovePlan {
  RowSelection selection;
  std::vector<std::size_t> positions;
  VectorXd stiffness;    // c of the removed rows
  MatrixXd gate;         // E^T R E
  MatrixXd gate_inverse;
  MatrixXd weight;       // c G^-1, symmetric
  double rcond = 0.0;
};

// Symmetric form D G D^-1 with D = C_E^1/2; eigenvalues lie in [0, 1].
struct GateForm {
  MatrixXd inverse;  // G^-1
  MatrixXd weight;   // c G^-1
  double rcond = 0.0;
};

GateForm analyze_removal_gate(const MatrixXd& gate, const VectorXd& c) {
  const VectorXd root = c.cwiseSqrt();
  const MatrixXd sym =
      symmetrized(root.asDiagonal() * gate * root.cwiseInverse().asDiagonal());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  const VectorXd& lambda = eig.eigenvalues();
  GateForm form;
  const double lo = lambda.minCoeff();
  const double hi = std::max(1.0, lambda.maxCoeff());
  form.rcond = std::isfinite(lo) ? std::max(0.0, lo / hi) : 0.0;
  if (!(lo > 0.0)) return form;
  const MatrixXd sym_inverse =
      eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  form.inverse = root.cwiseInverse().asDiagonal() * sym_inverse * root.asDiagonal();
  form.weight = symmetrized(root.asDiagonal() * sym_inverse * root.asDiagonal());
  return form;
}

RemovePlan plan_remove(const SystemState& state, std::span<const std::size_t> positions) {
  if (positions.empty()) throw ModelError("remove requires at least one element");
  RemovePlan plan;
  plan.positions.assign(positions.begin(), positions.end());
  std::sort(plan.positions.begin(), plan.positions.end());
  if (std::adjacent_find(plan.positions.begin(), plan.positions.end()) != plan.positions.end()) {
    throw ModelError("element listed twice in removal");
  }
  for (auto p : plan.positions) check_position(state, p);
  plan.selection = RowSelection::of(state.sys, plan.positions);
  const auto& rows = plan.selection.rows;
  const Index m = plan.selection.size();
  const auto r = state.redundancy.view();
  plan.gate.resize(m, m);
  plan.stiffness.resize(m);
  for (Index k = 0; k < m; ++k) {
    plan.stiffness[k] = state.sys.material()[rows[static_cast<std::size_t>(k)]];
    for (Index l = 0; l < m; ++l) {
      plan.gate(k, l) = r(rows[static_cast<std::size_t>(k)], rows[static_cast<std::size_t>(l)]);
    }
  }
  GateForm form = analyze_removal_gate(plan.gate, plan.stiffness);
  plan.rcond = form.rcond;
  plan.gate_inverse = std::move(form.inverse);
  plan.weight = std::move(form.weight);
  return plan;
}

[[noreturn]] void throw_determinate(const SystemState& state, const RemovePlan& plan) {
  std::vector<int> ids;
  for (auto p : plan.positions) ids.push_back(state.sys.elements()[p].id);
  throw StaticallyDeterminateRemoval(plan.positions, std::move(ids), plan.rcond);
}

void commit_remove(SystemState& state, const RemovePlan& plan, const UpdateOptions& options) {
  const Index n = state.dofs();
  const Index nq = state.rows();
  const auto& rows = plan.selection.rows;
  const Index m = plan.selection.size();

  SparseRowMatrix a(m, n);
  {
    std::vector<ElementBlock> parts;
    for (auto p : plan.positions) parts.push_back(state.sys.block(p));
    a = stack(parts, n).rows;
  }
  const MatrixXd u = state.stiffness_inverse * a.transpose();
  state.stiffness_inverse.noalias() += (u * plan.weight) * u.transpose();

  const Index size = nq - m;
  MatrixXd y(size, m);
  MatrixXd q(m, size);
  {
    const auto r = state.redundancy.view();
    std::size_t next = 0;
    Index t = 0;
    for (Index i = 0; i < nq; ++i) {
      if (next < rows.size() && rows[next] == i) {
        ++next;
        continue;
      }
      for (Index k = 0; k < m; ++k) {
        y(t, k) = r(i, rows[static_cast<std::size_t>(k)]);
        q(k, t) = r(rows[static_cast<std::size_t>(k)], i);
      }
      ++t;
    }
  }
  const MatrixXd gq = plan.gate_inverse * q;

  state.sys.erase(plan.positions);
  state.redundancy.erase(rows);
  auto r = state.redundancy.view();
  for (Index j = 0; j < size; ++j) r.col(j).noalias() -= y * gq.col(j);

  count(options.counter, 2.0 * dbl(n) * dbl(a.nonZeros()) + 2.0 * dbl(n) * dbl(n) * dbl(m) +
                             2.0 * dbl(size) * dbl(size) * dbl(m));
}

double exchange_same_modes(SystemState& state, std::size_t position, ElementBlock& block,
                           const UpdateOptions& options) {
  const Index n = state.dofs();
  const Index nq = state.rows();
  const RowRange range = state.sys.row_range(position);
  const Index m = range.count;
  const Index e0 = range.offset;
  const ElementBlock old = state.sys.block(position);

  std::vector<ElementBlock> both{old, block};
  const Stacked star = stack(both, n);
  VectorXd c_star = star.stiffness;
  c_star.head(m) = -c_star.head(m);
  const VectorXd& c_old = old.stiffness;
  const VectorXd& c_new = block.stiffness;

  const MatrixXd u = state.stiffness_inverse * star.rows.transpose();
  const MatrixXd s = symmetrized(star.rows * u);
  const MatrixXd gate = MatrixXd::Identity(2 * m, 2 * m) + s * c_star.asDiagonal();
  Eigen::PartialPivLU<MatrixXd> lu(gate);
  const double rcond = lu.rcond();
  if (!std::isfinite(rcond) || rcond < options.gate_threshold) {
    throw GateSingular("exchange of element " + std::to_string(old.id) +
                           " would leave the structure kinematically indeterminate",
                       rcond);
  }
  const MatrixXd w = symmetrized(c_star.asDiagonal() * lu.inverse());
  const MatrixXd v = state.sys.compatibility() * u;

  state.sys.replace(position, block);

  state.stiffness_inverse.noalias() -= (u * w) * u.transpose();

  MatrixXd x = v;
  x.middleRows(e0, m) = s.bottomRows(m);
  const MatrixXd z = state.sys.material().asDiagonal() * (x * w);
  const VectorXd& c_all = state.sys.material();

  auto r = state.redundancy.view();
  for (Index j = 0; j < nq; ++j) {
    auto col = r.col(j);
    if (j >= e0 && j < e0 + m) {
      const Index l = j - e0;
      col.head(e0) -= v.col(m + l).head(e0) * c_new[l] - v.col(l).head(e0) * c_old[l];
      col.tail(nq - e0 - m) -=
          v.col(m + l).tail(nq - e0 - m) * c_new[l] - v.col(l).tail(nq - e0 - m) * c_old[l];
      col.segment(e0, m) -= s.col(m + l).tail(m) * c_new[l] - s.col(l).head(m) * c_old[l];
    } else {
      for (Index k = 0; k < m; ++k) col[e0 + k] -= (v(j, m + k) - v(j, k)) * c_all[j];
    }
    col.noalias() += x * z.row(j).transpose();
  }
  count(options.counter, 4.0 * dbl(n) * dbl(star.rows.nonZeros()) +
                             2.0 * dbl(state.sys.compatibility().nonZeros()) * dbl(2 * m) +
                             2.0 * dbl(n) * dbl(n) * dbl(2 * m) +
                             2.0 * dbl(nq) * dbl(nq) * dbl(2 * m));
  return rcond;
}

double exchange_mixed_modes(SystemState& state, std::size_t position, ElementBlock& block,
                            const UpdateOptions& options) {
  const int old_id = state.sys.elements()[position].id;
  const int final_id = block.id == 0 ? old_id : block.id;
  const RowRange range = state.sys.row_range(position);

  ElementBlock added = block;
  added.id = 0;
  std::span<ElementBlock> one(&added, 1);
  AddPlan plan = plan_add(state, std::span<const ElementBlock>(one), options);

  // Gate of the old rows as it will read after the add.
  const auto r = state.redundancy.view();
  const Index m = range.count;
  MatrixXd gate = r.block(range.offset, range.offset, m, m);
  const MatrixXd ve = plan.v.middleRows(range.offset, m);
  const VectorXd c_old = state.sys.material().segment(range.offset, m);
  gate.noalias() += ve * plan.w * ve.transpose() * c_old.asDiagonal();
  const GateForm form = analyze_removal_gate(gate, c_old);
  if (form.rcond < options.gate_threshold) {
    throw GateSingular("exchange of element " + std::to_string(old_id) +
                           " would leave the structure kinematically indeterminate",
                       form.rcond);
  }

  commit_add(state, plan, one, position, options);
  const std::size_t shifted = position + 1;
  const RemovePlan removal = plan_remove(state, std::span<const std::size_t>(&shifted, 1));
  commit_remove(state, removal, options);
  state.sys.set_id(position, final_id);
  block.id = final_id;
  return std::min(form.rcond, removal.rcond);
}

}  // namespace

RowSelection RowSelection::of(const SystemMatrices& sys, std::span<const std::size_t> positions) {
  std::vector<std::size_t> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  RowSelection selection;
  for (auto p : sorted) {
    const RowRange r = sys.row_range(p);
    for (Index k = 0; k < r.count; ++k) selection.rows.push_back(r.offset + k);
  }
  return selection;
}

InverseUpdate woodbury_update_inverse(const MatrixXd& inverse, const MatrixXd& u,
                                      const MatrixXd& v, double threshold) {
  const Index n = inverse.rows();
  const Index m = u.cols();
  if (inverse.cols() != n || u.rows() != n || v.rows() != n || v.cols() != m) {
    throw ModelError("woodbury_update_inverse: inconsistent dimensions");
  }
  InverseUpdate out;
  out.intermediate.noalias() = inverse * u;
  const MatrixXd vt_inverse = v.transpose() * inverse;
  const MatrixXd gate = MatrixXd::Identity(m, m) - v.transpose() * out.intermediate;
  if (m == 0) {
    out.inverse = inverse;
    return out;
  }
  Eigen::PartialPivLU<MatrixXd> lu(gate);
  const double rcond = lu.rcond();
  if (!std::isfinite(rcond) || rcond < threshold) {
    throw GateSingular("Woodbury gate I - V^T M^-1 U is numerically singular", rcond);
  }
  out.inverse = inverse;
  out.inverse.noalias() += out.intermediate * lu.solve(vt_inverse);
  return out;
}

void update_add(SystemState& state, std::span<ElementBlock> blocks,
                std::optional<std::size_t> position, const UpdateOptions& options) {
  const std::size_t at = position.value_or(state.sys.element_count());
  if (at > state.sys.element_count()) {
    throw ModelError("insert position " + std::to_string(at + 1) + " out of range");
  }
  AddPlan plan = plan_add(state, std::span<const ElementBlock>(blocks), options);
  commit_add(state, plan, blocks, at, options);
  finish(state, options);
}

int update_add(SystemState& state, ElementBlock block, std::optional<std::size_t> position,
               const UpdateOptions& options) {
  update_add(state, std::span<ElementBlock>(&block, 1), position, options);
  return block.id;
}

void update_remove(SystemState& state, std::span<const std::size_t> positions,
                   const UpdateOptions& options) {
  const RemovePlan plan = plan_remove(state, positions);
  if (plan.rcond < options.gate_threshold) throw_determinate(state, plan);
  commit_remove(state, plan, options);
  finish(state, options, plan.rcond);
}

void update_remove(SystemState& state, std::size_t position, const UpdateOptions& options) {
  update_remove(state, std::span<const std::size_t>(&position, 1), options);
}

void update_exchange(SystemState& state, std::size_t position, ElementBlock block,
                     const UpdateOptions& options) {
  check_position(state, position);
  block.validate(state.dofs());
  const int old_id = state.sys.elements()[position].id;
  if (block.id != 0 && block.id != old_id) {
    for (const auto& e : state.sys.elements()) {
      if (e.id == block.id) {
        throw ModelError("element id " + std::to_string(block.id) + " already exists");
      }
    }
  }
  if (block.id == 0) block.id = old_id;
  const double rcond = block.modes() == state.sys.row_range(position).count
                           ? exchange_same_modes(state, position, block, options)
                           : exchange_mixed_modes(state, position, block, options);
  finish(state, options, rcond);
}

UpdateGate removability_gate(const SystemState& state, std::span<const std::size_t> positions) {
  RemovePlan plan = plan_remove(state, positions);
  UpdateGate gate;
  gate.matrix = std::move(plan.gate);
  gate.inverse = std::move(plan.gate_inverse);
  gate.rcond = plan.rcond;
  return gate;
}

VectorXd delta_add_diagonal(const SystemState& state, std::span<const ElementBlock> blocks) {
  const AddPlan plan = plan_add(state, blocks, UpdateOptions{});
  const MatrixXd vw = plan.v * plan.w;
  return vw.cwiseProduct(plan.v).rowwise().sum().cwiseProduct(state.sys.material());
}

void apply(SystemState& state, UpdateOp& op, const UpdateOptions& options) {
  std::visit(
      [&](auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, AddOp>) {
          update_add(state, o.blocks, o.position, options);
        } else if constexpr (std::is_same_v<T, RemoveOp>) {
          update_remove(state, o.positions, options);
        } else {
          update_exchange(state, o.position, o.block, options);
        }
      },
      op);
}

}  // namespace redmx
