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

// Line-oriented text formats. '#' starts a comment anywhere on a line.
//
// Model (.rxm), geometric form:
//   rxm 1
//   dim 2
//   node 1 0 0 fix xy          # fix flags: x y z r, or "all"
//   node 2 0 1
//   truss 1 1 2 E 200 A 1
//   beam 2 2 3 E 210 A 1 I 0.01
//
// Model (.rxm), raw form giving A and C directly:
//   rxm 1
//   raw 4                      # number of degrees of freedom
//   element 1 c 200 row 0 1 0 0
//   element 2 c 5 srow 3:0.5 4:0.5   # sparse row, 1-based columns
//
// Update script (.rxu). Element references are 1-based element numbers in
// the current order, or @<id> for a stable element id:
//   rxu 1                      # optional header
//   add [at N] [id L] <payload>
//   add [at N] begin
//     [id L] <payload>
//   end
//   remove N [N ...]
//   exchange N [id L] <payload>
// where <payload> is "truss n1 n2 E v A v", "beam n1 n2 E v A v I v" or
// "c v... row v... [row v...]" (srow allowed).

#ifndef REDMX_IO_HPP_
#define REDMX_IO_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "redmx/model.hpp"
#include "redmx/redundancy.hpp"

namespace redmx {

using ModelDocument = std::variant<StructuralModel, SystemMatrices>;

/// Throws ParseError (syntax) or ModelError (semantics).
ModelDocument parse_model(std::string_view text);
std::string serialize_model(const StructuralModel& model);
std::string serialize_model(const SystemMatrices& sys);
std::string serialize_model(const ModelDocument& document);

/// A geometric document is assembled; a raw one is returned as is.
SystemMatrices to_system(const ModelDocument& document);

struct ElementRef {
  enum class Kind { Number, Id };
  Kind kind = Kind::Number;
  int value = 0;  // 1-based number or element id
};

struct GeometricPayload {
  ElementKind kind = ElementKind::Truss;
  std::array<int, 2> node_ids{};
  double youngs_modulus = 0.0;
  double area = 0.0;
  double moment_of_inertia = 0.0;
};

struct RawRow {
  bool sparse = false;
  std::vector<double> values;      // dense values
  std::vector<Index> columns;      // sparse: 0-based columns
};

struct RawPayload {
  std::vector<double> stiffness;
  std::vector<RawRow> rows;
};

struct ScriptElement {
  int id = 0;
  std::variant<GeometricPayload, RawPayload> payload;
};

struct AddStep {
  std::optional<int> at;  // 1-based element number the first new element takes
  std::vector<ScriptElement> elements;
  bool grouped = false;   // written with begin/end
};

struct RemoveStep {
  std::vector<ElementRef> elements;
};

struct ExchangeStep {
  ElementRef element;
  ScriptElement replacement;
};

using ScriptStep = std::variant<AddStep, RemoveStep, ExchangeStep>;

struct ScriptLine {
  ScriptStep step;
  int line = 0;
};

struct UpdateScript {
  std::vector<ScriptLine> steps;
};

UpdateScript parse_update_script(std::string_view text);
/// Parses a single step written on one line (no begin/end).
ScriptStep parse_update_step(std::string_view text);
std::string serialize_script(const UpdateScript& script);
std::string serialize_step(const ScriptStep& step);

/// Dense block from a raw payload; throws ModelError on width mismatch.
ElementBlock raw_block(const RawPayload& payload, Index dofs, int id = 0);

enum class NumberStyle {
  Fixed,        // `precision` decimals
  Significant,  // `precision` significant digits, |x| < 1e-6 printed as 0.0
  Shortest,     // shortest round-trip representation
};

std::string format_number(double value, int precision = 3,
                          NumberStyle style = NumberStyle::Fixed);

/// Rows on separate lines, entries separated by one space.
std::string export_matrix(const Eigen::MatrixXd& m, int precision = 3,
                          NumberStyle style = NumberStyle::Fixed);
Eigen::MatrixXd parse_matrix(std::string_view text);

/// Human-readable .report.txt content.
std::string format_report(const RedundancyReport& report, int precision = 6);

}  // namespace redmx

#endif  // REDMX_IO_HPP_
