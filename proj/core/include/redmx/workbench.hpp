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

// A live state together with the model it came from. Resolves script steps
// (element numbers, @ids, geometric payloads) into update operations and
// keeps the geometry mirror in step with the state.

#ifndef REDMX_WORKBENCH_HPP_
#define REDMX_WORKBENCH_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "redmx/io.hpp"
#include "redmx/model.hpp"
#include "redmx/redundancy.hpp"
#include "redmx/woodbury.hpp"

namespace redmx {

class Workbench {
 public:
  /// Assembles the document and builds the state.
  static Workbench from_document(const ModelDocument& document);

  const SystemState& state() const { return state_; }
  bool has_geometry() const { return geometry_.has_value(); }
  /// Nodes and dimension of a geometric document; elements are not kept here.
  const std::optional<StructuralModel>& geometry() const { return geometry_; }
  /// Element record per position, empty for elements given as raw blocks.
  const std::vector<std::optional<Element>>& elements() const { return elements_; }

  /// Throws ModelError for unknown references or invalid payloads.
  UpdateOp resolve(const ScriptStep& step) const;

  /// Applies the step. On any exception the workbench is unchanged.
  void apply(const ScriptStep& step, const UpdateOptions& options = {});

  /// Predicted diagonal change of the existing rows for an add.
  Eigen::VectorXd preview(const AddStep& step) const;

  RedundancyReport report() const { return make_report(state_); }

  /// Geometric when every element has geometry, raw otherwise.
  ModelDocument document() const;

  std::size_t position(const ElementRef& ref) const;

  void set_generation(std::uint64_t generation) { state_.generation = generation; }

 private:
  ElementBlock block_for(const ScriptElement& element, std::optional<Element>* record) const;

  SystemState state_;
  std::optional<StructuralModel> geometry_;
  std::optional<DofMap> dofs_;
  std::vector<std::optional<Element>> elements_;
};

}  // namespace redmx

#endif  // REDMX_WORKBENCH_HPP_
