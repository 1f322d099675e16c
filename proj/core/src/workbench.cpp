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

#include "redmx/workbench.hpp"

#include <algorithm>
#include <string>

#include "redmx/errors.hpp"

namespace redmx {

Workbench Workbench::from_document(const ModelDocument& document) {
  Workbench w;
  if (const auto* model = std::get_if<StructuralModel>(&document)) {
    SystemMatrices sys = assemble_system(*model);
    check_kinematic_determinacy(sys);
    w.state_ = SystemState::build(std::move(sys));
    StructuralModel geometry = *model;
    geometry.elements.clear();
    w.dofs_ = DofMap::build(*model);
    w.geometry_ = std::move(geometry);
    std::vector<Element> sorted = model->elements;
    std::sort(sorted.begin(), sorted.end(),
              [](const Element& a, const Element& b) { return a.id < b.id; });
    for (const auto& e : sorted) w.elements_.emplace_back(e);
  } else {
    const auto& sys = std::get<SystemMatrices>(document);
    check_kinematic_determinacy(sys);
    w.state_ = SystemState::build(sys);
    w.elements_.assign(sys.element_count(), std::nullopt);
  }
  return w;
}

std::size_t Workbench::position(const ElementRef& ref) const {
  if (ref.kind == ElementRef::Kind::Id) return state_.sys.position_of(ref.value);
  const auto count = state_.sys.element_count();
  if (ref.value < 1 || static_cast<std::size_t>(ref.value) > count) {
    throw ModelError("no element number " + std::to_string(ref.value) + " (model has " +
                     std::to_string(count) + " elements)");
  }
  return static_cast<std::size_t>(ref.value - 1);
}

ElementBlock Workbench::block_for(const ScriptElement& element,
                                  std::optional<Element>* record) const {
  if (const auto* raw = std::get_if<RawPayload>(&element.payload)) {
    if (record != nullptr) record->reset();
    return raw_block(*raw, state_.dofs(), element.id);
  }
  const auto& g = std::get<GeometricPayload>(element.payload);
  if (!geometry_) throw ModelError("geometric elements need a geometric model");
  Element e;
  e.id = element.id;
  e.kind = g.kind;
  e.node_ids = g.node_ids;
  e.youngs_modulus = g.youngs_modulus;
  e.area = g.area;
  e.moment_of_inertia = g.moment_of_inertia;
  for (int id : e.node_ids) {
    if (geometry_->find_node(id) == nullptr) throw ModelError("unknown node " + std::to_string(id));
  }
  if (e.node_ids[0] == e.node_ids[1]) throw ModelError("element nodes must be distinct");
  if (!(e.youngs_modulus > 0.0) || !(e.area > 0.0)) {
    throw ModelError("E and A must be positive");
  }
  if (e.kind == ElementKind::PlaneBeam) {
    for (int id : e.node_ids) {
      if (!dofs_->has_rotation(id) && !geometry_->node(id).fixed_rotation) {
        throw ModelError("node " + std::to_string(id) +
                         " has no rotational degree of freedom for a beam");
      }
    }
  }
  ElementBlock block = assemble_block(e, *geometry_, *dofs_);
  block.id = element.id;
  if (record != nullptr) *record = e;
  return block;
}

UpdateOp Workbench::resolve(const ScriptStep& step) const {
  if (const auto* add = std::get_if<AddStep>(&step)) {
    AddOp op;
    if (add->at) {
      const auto count = state_.sys.element_count();
      if (*add->at < 1 || static_cast<std::size_t>(*add->at) > count + 1) {
        throw ModelError("insert position " + std::to_string(*add->at) + " out of range");
      }
      op.position = static_cast<std::size_t>(*add->at - 1);
    }
    for (const auto& e : add->elements) op.blocks.push_back(block_for(e, nullptr));
    return op;
  }
  if (const auto* remove = std::get_if<RemoveStep>(&step)) {
    RemoveOp op;
    for (const auto& ref : remove->elements) op.positions.push_back(position(ref));
    std::sort(op.positions.begin(), op.positions.end());
    if (std::adjacent_find(op.positions.begin(), op.positions.end()) != op.positions.end()) {
      throw ModelError("element listed twice in removal");
    }
    return op;
  }
  const auto& exchange = std::get<ExchangeStep>(step);
  ExchangeOp op;
  op.position = position(exchange.element);
  op.block = block_for(exchange.replacement, nullptr);
  return op;
}

void Workbench::apply(const ScriptStep& step, const UpdateOptions& options) {
  UpdateOp op = resolve(step);
  std::vector<std::optional<Element>> records;
  if (const auto* add = std::get_if<AddStep>(&step)) {
    for (const auto& e : add->elements) {
      std::optional<Element> record;
      block_for(e, &record);
      records.push_back(record);
    }
  } else if (const auto* exchange = std::get_if<ExchangeStep>(&step)) {
    std::optional<Element> record;
    block_for(exchange->replacement, &record);
    records.push_back(record);
  }

  redmx::apply(state_, op, options);

  if (auto* add = std::get_if<AddOp>(&op)) {
    const std::size_t at = add->position.value_or(elements_.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i]) records[i]->id = add->blocks[i].id;
    }
    elements_.insert(elements_.begin() + static_cast<std::ptrdiff_t>(at), records.begin(),
                     records.end());
  } else if (auto* remove = std::get_if<RemoveOp>(&op)) {
    for (auto it = remove->positions.rbegin(); it != remove->positions.rend(); ++it) {
      elements_.erase(elements_.begin() + static_cast<std::ptrdiff_t>(*it));
    }
  } else {
    const auto& exchange = std::get<ExchangeOp>(op);
    auto& record = records.front();
    if (record) record->id = state_.sys.elements()[exchange.position].id;
    elements_[exchange.position] = record;
  }
}

Eigen::VectorXd Workbench::preview(const AddStep& step) const {
  std::vector<ElementBlock> blocks;
  for (const auto& e : step.elements) blocks.push_back(block_for(e, nullptr));
  return delta_add_diagonal(state_, blocks);
}

ModelDocument Workbench::document() const {
  const bool complete =
      geometry_ && std::all_of(elements_.begin(), elements_.end(),
                               [](const std::optional<Element>& e) { return e.has_value(); });
  if (!complete) return state_.sys;
  StructuralModel model = *geometry_;
  for (const auto& e : elements_) model.elements.push_back(*e);
  return model;
}

}  // namespace redmx
