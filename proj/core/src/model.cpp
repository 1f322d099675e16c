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

#include "redmx/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/QR>

#include "redmx/errors.hpp"

namespace redmx {

namespace {

std::string element_name(int id) { return "element " + std::to_string(id); }

// A contiguous run of rows taken from a compressed row-major matrix.
struct RowSlice {
  const SparseRowMatrix* source;
  Index begin;
  Index count;
};

SparseRowMatrix concat_rows(std::span<const RowSlice> slices, Index cols) {
  Index rows = 0;
  Index nnz = 0;
  for (const auto& s : slices) {
    rows += s.count;
    const auto* outer = s.source->outerIndexPtr();
    nnz += outer[s.begin + s.count] - outer[s.begin];
  }
  SparseRowMatrix out(rows, cols);
  out.resizeNonZeros(nnz);
  auto* outer = out.outerIndexPtr();
  auto* inner = out.innerIndexPtr();
  auto* values = out.valuePtr();
  Index row = 0;
  Index k = 0;
  outer[0] = 0;
  for (const auto& s : slices) {
    const auto* src_outer = s.source->outerIndexPtr();
    const auto* src_inner = s.source->innerIndexPtr();
    const auto* src_values = s.source->valuePtr();
    for (Index r = s.begin; r < s.begin + s.count; ++r) {
      for (auto p = src_outer[r]; p < src_outer[r + 1]; ++p) {
        inner[k] = src_inner[p];
        values[k] = src_values[p];
        ++k;
      }
      outer[++row] = static_cast<SparseRowMatrix::StorageIndex>(k);
    }
  }
  return out;
}

SparseRowMatrix compressed(const SparseRowMatrix& m) {
  SparseRowMatrix out = m;
  out.makeCompressed();
  return out;
}

}  // namespace

bool Node::fully_fixed(int dimension) const {
  for (int d = 0; d < dimension; ++d) {
    if (!fixed[static_cast<std::size_t>(d)]) return false;
  }
  return true;
}

const Node* StructuralModel::find_node(int id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Node& StructuralModel::node(int id) const {
  const Node* n = find_node(id);
  if (n == nullptr) throw ModelError("unknown node " + std::to_string(id));
  return *n;
}

bool StructuralModel::has_beams() const {
  return std::any_of(elements.begin(), elements.end(), [](const Element& e) {
    return e.kind == ElementKind::PlaneBeam;
  });
}

double StructuralModel::length(const Element& element) const {
  const auto& a = node(element.node_ids[0]).coords;
  const auto& b = node(element.node_ids[1]).coords;
  return (b - a).head(dimension).norm();
}

void StructuralModel::validate() const {
  if (dimension != 2 && dimension != 3) {
    throw ModelError("dimension must be 2 or 3, got " + std::to_string(dimension));
  }
  if (nodes.empty()) throw ModelError("model has no nodes");
  std::set<int> node_ids;
  bool supported = false;
  for (const auto& n : nodes) {
    if (!node_ids.insert(n.id).second) {
      throw ModelError("duplicate node id " + std::to_string(n.id));
    }
    if (!n.coords.allFinite()) {
      throw ModelError("node " + std::to_string(n.id) + " has non-finite coordinates");
    }
    for (int d = 0; d < dimension; ++d) supported |= n.fixed[static_cast<std::size_t>(d)];
    supported |= n.fixed_rotation;
  }
  if (!supported) throw ModelError("model has no supports");

  std::set<int> element_ids;
  for (const auto& e : elements) {
    const std::string name = element_name(e.id);
    if (!element_ids.insert(e.id).second) {
      throw ModelError("duplicate element id " + std::to_string(e.id));
    }
    for (int id : e.node_ids) {
      if (node_ids.count(id) == 0) {
        throw ModelError(name + " references unknown node " + std::to_string(id));
      }
    }
    if (e.node_ids[0] == e.node_ids[1]) throw ModelError(name + " connects a node to itself");
    if (!(e.youngs_modulus > 0.0) || !std::isfinite(e.youngs_modulus)) {
      throw ModelError(name + " has nonpositive Young's modulus");
    }
    if (!(e.area > 0.0) || !std::isfinite(e.area)) {
      throw ModelError(name + " has nonpositive cross-sectional area");
    }
    if (e.kind == ElementKind::PlaneBeam) {
      if (dimension != 2) throw ModelError(name + ": beams are only supported in plane models");
      if (!(e.moment_of_inertia > 0.0) || !std::isfinite(e.moment_of_inertia)) {
        throw ModelError(name + " has no positive second moment of area");
      }
    }
    if (!(length(e) > 0.0)) throw ModelError(name + " has zero length");
  }
}

DofMap DofMap::build(const StructuralModel& model) {
  std::set<int> beam_nodes;
  if (model.dimension == 2) {
    for (const auto& e : model.elements) {
      if (e.kind == ElementKind::PlaneBeam) beam_nodes.insert(e.node_ids.begin(), e.node_ids.end());
    }
  }
  std::vector<const Node*> sorted;
  sorted.reserve(model.nodes.size());
  for (const auto& n : model.nodes) sorted.push_back(&n);
  std::sort(sorted.begin(), sorted.end(),
            [](const Node* a, const Node* b) { return a->id < b->id; });

  DofMap map;
  Index next = 0;
  for (const Node* n : sorted) {
    std::array<Index, 4> entry{-1, -1, -1, -1};
    for (int d = 0; d < model.dimension; ++d) {
      if (!n->fixed[static_cast<std::size_t>(d)]) entry[static_cast<std::size_t>(d)] = next++;
    }
    if (beam_nodes.count(n->id) != 0 && !n->fixed_rotation) entry[3] = next++;
    map.map_.emplace(n->id, entry);
  }
  if (next == 0) throw ModelError("model has no free degrees of freedom");
  map.size_ = next;
  return map;
}

Index DofMap::index(int node_id, Direction direction) const {
  auto it = map_.find(node_id);
  if (it == map_.end()) return -1;
  return it->second[static_cast<std::size_t>(direction)];
}

bool DofMap::has_rotation(int node_id) const { return index(node_id, Direction::RotZ) >= 0; }

DofMap build_dof_map(const StructuralModel& model) { return DofMap::build(model); }

ElementBlock ElementBlock::from_dense(const Eigen::MatrixXd& rows,
                                      const Eigen::VectorXd& stiffness, int id) {
  ElementBlock block;
  block.id = id;
  block.rows = rows.sparseView();
  block.rows.makeCompressed();
  block.stiffness = stiffness;
  return block;
}

void ElementBlock::validate(Index dofs) const {
  const std::string name = id != 0 ? element_name(id) : std::string("new element");
  if (modes() < 1) throw ModelError(name + " has no load-carrying modes");
  if (rows.cols() != dofs) {
    throw ModelError(name + " has " + std::to_string(rows.cols()) + " columns, expected " +
                     std::to_string(dofs));
  }
  if (stiffness.size() != modes()) {
    throw ModelError(name + ": stiffness count does not match mode count");
  }
  for (Index i = 0; i < stiffness.size(); ++i) {
    if (!(stiffness[i] > 0.0) || !std::isfinite(stiffness[i])) {
      throw ModelError(name + " has a nonpositive mode stiffness");
    }
  }
  bool any = false;
  for (Index k = 0; k < rows.outerSize() && !any; ++k) {
    for (SparseRowMatrix::InnerIterator it(rows, k); it; ++it) {
      if (!std::isfinite(it.value())) throw ModelError(name + " has non-finite coefficients");
      if (it.value() != 0.0) {
        any = true;
        break;
      }
    }
  }
  if (!any) throw ModelError(name + " has no free degree of freedom (all-zero compatibility rows)");
}

SystemMatrices::SystemMatrices(Index dofs)
    : dofs_(dofs), compatibility_(0, dofs), material_(0), offsets_{0} {
  compatibility_.makeCompressed();
}

void SystemMatrices::rebuild_offsets() {
  offsets_.assign(elements_.size() + 1, 0);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    offsets_[i + 1] = offsets_[i] + elements_[i].modes;
  }
}

RowRange SystemMatrices::row_range(std::size_t position) const {
  if (position >= elements_.size()) {
    throw ModelError("element position " + std::to_string(position + 1) + " out of range");
  }
  return {offsets_[position], elements_[position].modes};
}

std::size_t SystemMatrices::position_of(int id) const {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i].id == id) return i;
  }
  throw ModelError("unknown " + element_name(id));
}

int SystemMatrices::next_id() const {
  int id = 0;
  for (const auto& e : elements_) id = std::max(id, e.id);
  return id + 1;
}

ElementBlock SystemMatrices::block(std::size_t position) const {
  const RowRange r = row_range(position);
  ElementBlock b;
  b.id = elements_[position].id;
  b.rows = compatibility_.middleRows(r.offset, r.count);
  b.rows.makeCompressed();
  b.stiffness = material_.segment(r.offset, r.count);
  return b;
}

void SystemMatrices::insert(std::size_t position, std::span<ElementBlock> blocks) {
  if (position > elements_.size()) {
    throw ModelError("insert position " + std::to_string(position + 1) + " out of range");
  }
  int fresh = next_id();
  std::set<int> ids;
  for (const auto& e : elements_) ids.insert(e.id);
  Index added = 0;
  for (auto& b : blocks) {
    b.validate(dofs_);
    if (b.id == 0) b.id = fresh++;
    if (!ids.insert(b.id).second) throw ModelError("duplicate " + element_name(b.id));
    fresh = std::max(fresh, b.id + 1);
    added += b.modes();
  }
  const Index at = position == elements_.size() ? rows() : offsets_[position];

  std::vector<SparseRowMatrix> parts;
  parts.reserve(blocks.size());
  for (const auto& b : blocks) parts.push_back(compressed(b.rows));
  std::vector<RowSlice> slices;
  slices.push_back({&compatibility_, 0, at});
  for (const auto& p : parts) slices.push_back({&p, 0, p.rows()});
  slices.push_back({&compatibility_, at, rows() - at});
  SparseRowMatrix next = concat_rows(slices, dofs_);

  Eigen::VectorXd material(material_.size() + added);
  material.head(at) = material_.head(at);
  Index k = at;
  for (const auto& b : blocks) {
    material.segment(k, b.modes()) = b.stiffness;
    k += b.modes();
  }
  material.tail(material_.size() - at) = material_.tail(material_.size() - at);

  std::vector<ElementRows> entries;
  for (const auto& b : blocks) entries.push_back({b.id, b.modes()});
  elements_.insert(elements_.begin() + static_cast<std::ptrdiff_t>(position), entries.begin(),
                   entries.end());
  compatibility_ = std::move(next);
  material_ = std::move(material);
  rebuild_offsets();
}

void SystemMatrices::append(ElementBlock block) {
  insert(elements_.size(), std::span<ElementBlock>(&block, 1));
}

void SystemMatrices::erase(std::span<const std::size_t> positions) {
  std::vector<std::size_t> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ModelError("duplicate element position in removal");
  }
  for (auto p : sorted) (void)row_range(p);

  std::vector<RowSlice> slices;
  std::vector<char> removed(elements_.size(), 0);
  for (auto p : sorted) removed[p] = 1;
  Index kept_rows = 0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (removed[i]) continue;
    slices.push_back({&compatibility_, offsets_[i], elements_[i].modes});
    kept_rows += elements_[i].modes;
  }
  SparseRowMatrix next = concat_rows(slices, dofs_);
  Eigen::VectorXd material(kept_rows);
  std::vector<ElementRows> entries;
  Index k = 0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (removed[i]) continue;
    material.segment(k, elements_[i].modes) = material_.segment(offsets_[i], elements_[i].modes);
    k += elements_[i].modes;
    entries.push_back(elements_[i]);
  }
  compatibility_ = std::move(next);
  material_ = std::move(material);
  elements_ = std::move(entries);
  rebuild_offsets();
}

void SystemMatrices::replace(std::size_t position, const ElementBlock& block) {
  const RowRange r = row_range(position);
  block.validate(dofs_);
  const int id = block.id == 0 ? elements_[position].id : block.id;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (i != position && elements_[i].id == id) throw ModelError("duplicate " + element_name(id));
  }
  const SparseRowMatrix part = compressed(block.rows);
  const RowSlice slices[] = {{&compatibility_, 0, r.offset},
                             {&part, 0, part.rows()},
                             {&compatibility_, r.offset + r.count, rows() - r.offset - r.count}};
  SparseRowMatrix next = concat_rows(slices, dofs_);
  Eigen::VectorXd material(material_.size() - r.count + block.modes());
  material.head(r.offset) = material_.head(r.offset);
  material.segment(r.offset, block.modes()) = block.stiffness;
  const Index tail = material_.size() - r.offset - r.count;
  material.tail(tail) = material_.tail(tail);
  compatibility_ = std::move(next);
  material_ = std::move(material);
  elements_[position] = {id, block.modes()};
  rebuild_offsets();
}

void SystemMatrices::set_id(std::size_t position, int id) {
  (void)row_range(position);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (i != position && elements_[i].id == id) throw ModelError("duplicate " + element_name(id));
  }
  elements_[position].id = id;
}

ElementBlock assemble_truss_block(const Element& element, const StructuralModel& model,
                                  const DofMap& dofs) {
  if (element.kind != ElementKind::Truss) {
    throw ModelError(element_name(element.id) + " is not a truss element");
  }
  const Node& first = model.node(element.node_ids[0]);
  const Node& second = model.node(element.node_ids[1]);
  const Eigen::Vector3d delta = second.coords - first.coords;
  const double length = delta.head(model.dimension).norm();
  if (!(length > 0.0)) throw ModelError(element_name(element.id) + " has zero length");
  const Eigen::Vector3d direction = delta / length;

  std::vector<Eigen::Triplet<double>> entries;
  for (int d = 0; d < model.dimension; ++d) {
    const double cosine = direction[d];
    if (cosine == 0.0) continue;
    const auto dir = static_cast<Direction>(d);
    if (Index i = dofs.index(first.id, dir); i >= 0) entries.emplace_back(0, i, -cosine);
    if (Index i = dofs.index(second.id, dir); i >= 0) entries.emplace_back(0, i, cosine);
  }
  ElementBlock block;
  block.id = element.id;
  block.rows.resize(1, dofs.size());
  block.rows.setFromTriplets(entries.begin(), entries.end());
  block.rows.makeCompressed();
  block.stiffness = Eigen::VectorXd::Constant(1, element.youngs_modulus * element.area / length);
  if (block.rows.nonZeros() == 0) {
    throw ModelError(element_name(element.id) +
                     " has no free degree of freedom along its axis (all-zero row)");
  }
  return block;
}

ElementBlock assemble_beam_block(const Element& element, const StructuralModel& model,
                                 const DofMap& dofs) {
  const std::string name = element_name(element.id);
  if (element.kind != ElementKind::PlaneBeam) throw ModelError(name + " is not a beam element");
  if (model.dimension != 2) throw ModelError(name + ": beams require a plane model");
  if (!(element.moment_of_inertia > 0.0)) throw ModelError(name + " is missing I");
  const Node& first = model.node(element.node_ids[0]);
  const Node& second = model.node(element.node_ids[1]);
  const Eigen::Vector2d delta = (second.coords - first.coords).head<2>();
  const double length = delta.norm();
  if (!(length > 0.0)) throw ModelError(name + " has zero length");
  const double c = delta.x() / length;
  const double s = delta.y() / length;
  const double chord = 2.0 / length;

  // Coefficients on (x1, y1, rz1, x2, y2, rz2).
  const double modes[3][6] = {
      {-c, -s, 0.0, c, s, 0.0},
      {0.0, 0.0, -1.0, 0.0, 0.0, 1.0},
      {-chord * s, chord * c, 1.0, chord * s, -chord * c, 1.0},
  };
  const Index global[6] = {
      dofs.index(first.id, Direction::X),  dofs.index(first.id, Direction::Y),
      dofs.index(first.id, Direction::RotZ), dofs.index(second.id, Direction::X),
      dofs.index(second.id, Direction::Y), dofs.index(second.id, Direction::RotZ),
  };
  std::vector<Eigen::Triplet<double>> entries;
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < 6; ++k) {
      if (global[k] >= 0 && modes[m][k] != 0.0) entries.emplace_back(m, global[k], modes[m][k]);
    }
  }
  ElementBlock block;
  block.id = element.id;
  block.rows.resize(3, dofs.size());
  block.rows.setFromTriplets(entries.begin(), entries.end());
  block.rows.makeCompressed();
  const double ei = element.youngs_modulus * element.moment_of_inertia;
  block.stiffness.resize(3);
  block.stiffness << element.youngs_modulus * element.area / length, ei / length, 3.0 * ei / length;
  if (block.rows.nonZeros() == 0) throw ModelError(name + " has no free degree of freedom");
  return block;
}

ElementBlock assemble_block(const Element& element, const StructuralModel& model,
                            const DofMap& dofs) {
  return element.kind == ElementKind::Truss ? assemble_truss_block(element, model, dofs)
                                            : assemble_beam_block(element, model, dofs);
}

SystemMatrices assemble_system(const StructuralModel& model) {
  model.validate();
  if (model.elements.empty()) throw ModelError("model has no elements");
  const DofMap dofs = DofMap::build(model);
  std::vector<const Element*> order;
  for (const auto& e : model.elements) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const Element* a, const Element* b) { return a->id < b->id; });

  std::vector<ElementBlock> blocks;
  blocks.reserve(order.size());
  for (const Element* e : order) blocks.push_back(assemble_block(*e, model, dofs));
  SystemMatrices sys(dofs.size());
  sys.insert(0, blocks);
  return sys;
}

Index numerical_rank(const SystemMatrices& sys) {
  const Eigen::MatrixXd dense = sys.dense_compatibility();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dense.rows(), dense.cols());
  qr.setThreshold(static_cast<double>(std::max<Index>(dense.rows(), 1)) *
                  std::numeric_limits<double>::epsilon());
  qr.compute(dense);
  return qr.rank();
}

Index check_kinematic_determinacy(const SystemMatrices& sys) {
  const Index rank = numerical_rank(sys);
  if (rank < sys.dofs()) throw RankDeficient(rank, sys.dofs());
  return sys.rows() - rank;
}

}  // namespace redmx
