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

// Structural models and the compatibility/material matrices derived from
// them. A model with n free degrees of freedom and n_q load-carrying modes
// yields a compatibility matrix A (n_q x n) mapping nodal displacements to
// generalized element deformations, and a diagonal material matrix C holding
// one positive stiffness per mode.

#ifndef REDMX_MODEL_HPP_
#define REDMX_MODEL_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace redmx {

using Index = Eigen::Index;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class ElementKind { Truss, PlaneBeam };

/// Local directions of a node. RotZ only exists for plane models with beams.
enum class Direction : int { X = 0, Y = 1, Z = 2, RotZ = 3 };

struct Node {
  int id = 0;
  Eigen::Vector3d coords = Eigen::Vector3d::Zero();
  std::array<bool, 3> fixed{};  // translational supports x, y, z
  bool fixed_rotation = false;  // only meaningful for beam-connected nodes

  bool fully_fixed(int dimension) const;
};

struct Element {
  int id = 0;
  ElementKind kind = ElementKind::Truss;
  std::array<int, 2> node_ids{};
  double youngs_modulus = 0.0;
  double area = 0.0;
  double moment_of_inertia = 0.0;  // beams only
};

struct StructuralModel {
  int dimension = 2;
  std::vector<Node> nodes;
  std::vector<Element> elements;

  /// Throws ModelError naming the first violated invariant.
  void validate() const;

  const Node& node(int id) const;
  const Node* find_node(int id) const;
  bool has_beams() const;
  /// Length of an element from its node coordinates.
  double length(const Element& element) const;
};

/// Global numbering of free degrees of freedom: ascending node id, then
/// direction x, y, (z), (rotation).
class DofMap {
 public:
  static DofMap build(const StructuralModel& model);

  Index size() const { return size_; }
  /// Global index, or -1 when the direction is fixed or does not exist.
  Index index(int node_id, Direction direction) const;
  bool has_rotation(int node_id) const;

 private:
  std::unordered_map<int, std::array<Index, 4>> map_;
  Index size_ = 0;
};

/// Compatibility rows and mode stiffnesses of one element (or one group of
/// modes added together).
struct ElementBlock {
  int id = 0;  // 0 lets the receiver assign a fresh id
  SparseRowMatrix rows;
  Eigen::VectorXd stiffness;

  Index modes() const { return rows.rows(); }
  Index dofs() const { return rows.cols(); }

  static ElementBlock from_dense(const Eigen::MatrixXd& rows,
                                 const Eigen::VectorXd& stiffness, int id = 0);

  /// Checks column count, positive stiffnesses and that not all rows vanish.
  void validate(Index dofs) const;
};

struct RowRange {
  Index offset = 0;
  Index count = 0;
};

struct ElementRows {
  int id = 0;
  Index modes = 0;
};

/// The stacked system (A, C) with element bookkeeping. Elements occupy
/// contiguous row ranges in their positional order.
class SystemMatrices {
 public:
  SystemMatrices() = default;
  explicit SystemMatrices(Index dofs);

  Index dofs() const { return dofs_; }
  Index rows() const { return compatibility_.rows(); }
  std::size_t element_count() const { return elements_.size(); }

  const SparseRowMatrix& compatibility() const { return compatibility_; }
  const Eigen::VectorXd& material() const { return material_; }
  const std::vector<ElementRows>& elements() const { return elements_; }

  RowRange row_range(std::size_t position) const;
  /// Position of the element with this id; throws ModelError if absent.
  std::size_t position_of(int id) const;
  int next_id() const;

  ElementBlock block(std::size_t position) const;
  Eigen::MatrixXd dense_compatibility() const { return Eigen::MatrixXd(compatibility_); }

  /// Inserts blocks before `position` (== element_count() appends). Blocks
  /// with id 0 receive fresh ids, which are written back.
  void insert(std::size_t position, std::span<ElementBlock> blocks);
  void append(ElementBlock block);
  void erase(std::span<const std::size_t> positions);
  void replace(std::size_t position, const ElementBlock& block);
  void set_id(std::size_t position, int id);

 private:
  void rebuild_offsets();

  Index dofs_ = 0;
  SparseRowMatrix compatibility_;
  Eigen::VectorXd material_;
  std::vector<ElementRows> elements_;
  std::vector<Index> offsets_;
};

DofMap build_dof_map(const StructuralModel& model);

ElementBlock assemble_truss_block(const Element& element,
                                  const StructuralModel& model,
                                  const DofMap& dofs);

/// Three natural modes per plane Euler-Bernoulli beam:
///   0: elongation u2 - u1                      stiffness EA/L
///   1: symmetric bending theta2 - theta1       stiffness EI/L
///   2: antisymmetric bending
///      theta1 + theta2 - 2 (v2 - v1) / L       stiffness 3EI/L
/// (u, v local axial/transverse). The Gram product reproduces the standard
/// 6x6 element stiffness matrix.
ElementBlock assemble_beam_block(const Element& element,
                                 const StructuralModel& model,
                                 const DofMap& dofs);

ElementBlock assemble_block(const Element& element, const StructuralModel& model,
                            const DofMap& dofs);

/// Blocks stacked in ascending element-id order.
SystemMatrices assemble_system(const StructuralModel& model);

/// Numerical rank of A from a column-pivoted QR with tolerance n_q * eps *
/// (largest pivot).
Index numerical_rank(const SystemMatrices& sys);

/// n_s = n_q - rank(A). Throws RankDeficient if rank(A) < n.
Index check_kinematic_determinacy(const SystemMatrices& sys);

}  // namespace redmx

#endif  // REDMX_MODEL_HPP_
