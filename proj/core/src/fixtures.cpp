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

#include "redmx/fixtures.hpp"

#include <cmath>
#include <vector>

namespace redmx::fixtures {

namespace {

const double kHalfRoot2 = std::sqrt(2.0) / 2.0;
const double kDiagonal = 100.0 * std::sqrt(2.0);

SystemMatrices build(const Eigen::MatrixXd& a, const Eigen::VectorXd& c) {
  std::vector<ElementBlock> blocks;
  for (Index i = 0; i < a.rows(); ++i) {
    blocks.push_back(ElementBlock::from_dense(a.row(i), c.segment(i, 1),
                                              static_cast<int>(i) + 1));
  }
  SystemMatrices sys(a.cols());
  sys.insert(0, blocks);
  return sys;
}

Eigen::MatrixXd rows_a() {
  Eigen::MatrixXd a(5, 4);
  a << 0, 1, 0, 0,
       0, 0, kHalfRoot2, kHalfRoot2,
       0, 0, 0, 1,
       -1, 0, 1, 0,
       0, 0, -1, 0;
  return a;
}

}  // namespace

SystemMatrices system_a() {
  Eigen::VectorXd c(5);
  c << 200, kDiagonal, 200, 200, 200;
  return build(rows_a(), c);
}

SystemMatrices system_b() {
  Eigen::MatrixXd a(6, 4);
  a << 0, 1, 0, 0,
       0, 0, kHalfRoot2, kHalfRoot2,
       -kHalfRoot2, kHalfRoot2, 0, 0,
       0, 0, 0, 1,
       -1, 0, 1, 0,
       0, 0, -1, 0;
  Eigen::VectorXd c(6);
  c << 200, kDiagonal, kDiagonal, 200, 200, 200;
  return build(a, c);
}

SystemMatrices system_c() {
  Eigen::MatrixXd a(5, 4);
  a << 0, 1, 0, 0,
       0, 0, kHalfRoot2, kHalfRoot2,
       -kHalfRoot2, kHalfRoot2, 0, 0,
       -1, 0, 1, 0,
       0, 0, -1, 0;
  Eigen::VectorXd c(5);
  c << 200, kDiagonal, kDiagonal, 200, 200;
  return build(a, c);
}

StructuralModel system_a_geometry() {
  StructuralModel m;
  m.dimension = 2;
  auto node = [&](int id, double x, double y, bool fixed) {
    Node n;
    n.id = id;
    n.coords = Eigen::Vector3d(x, y, 0.0);
    n.fixed = {fixed, fixed, false};
    m.nodes.push_back(n);
  };
  node(1, 0, 0, true);
  node(2, 0, 1, false);
  node(3, 1, 1, false);
  node(4, 1, 0, true);
  node(5, 2, 1, true);
  auto bar = [&](int id, int a, int b) {
    Element e;
    e.id = id;
    e.kind = ElementKind::Truss;
    e.node_ids = {a, b};
    e.youngs_modulus = 200.0;
    e.area = 1.0;
    m.elements.push_back(e);
  };
  bar(1, 1, 2);
  bar(2, 1, 3);
  bar(3, 4, 3);
  bar(4, 2, 3);
  bar(5, 3, 5);
  return m;
}

ElementBlock brace() {
  Eigen::MatrixXd row(1, 4);
  row << -kHalfRoot2, kHalfRoot2, 0, 0;
  return ElementBlock::from_dense(row, Eigen::VectorXd::Constant(1, kDiagonal));
}

ElementBlock restored_bar() {
  Eigen::MatrixXd row(1, 4);
  row << 0, 0, 0, 1;
  return ElementBlock::from_dense(row, Eigen::VectorXd::Constant(1, 200.0));
}

Eigen::MatrixXd printed_redundancy_a() {
  Eigen::MatrixXd r(5, 5);
  r << 0.0, 0.0, 0.0, 0.0, 0.0,
       0.0, 0.586, -0.414, 0.0, 0.414,
       0.0, -0.293, 0.207, 0.0, -0.207,
       0.0, 0.0, 0.0, 0.0, 0.0,
       0.0, 0.293, -0.207, 0.0, 0.207;
  return r;
}

Eigen::MatrixXd printed_redundancy_b() {
  Eigen::MatrixXd r(6, 6);
  r << 0.178, -0.0521, -0.252, 0.0368, 0.178, 0.141,
       -0.0737, 0.607, 0.104, -0.429, -0.0737, 0.356,
       -0.356, 0.104, 0.503, -0.0737, -0.356, -0.282,
       0.0368, -0.304, -0.0521, 0.215, 0.0368, -0.178,
       0.178, -0.0521, -0.252, 0.0368, 0.178, 0.141,
       0.141, 0.252, -0.199, -0.178, 0.141, 0.319;
  return r;
}

Eigen::MatrixXd printed_redundancy_c() {
  Eigen::MatrixXd r(5, 5);
  r << 0.172, 0.0, -0.243, 0.172, 0.172,
       0.0, 0.0, 0.0, 0.0, 0.0,
       -0.343, 0.0, 0.485, -0.343, -0.343,
       0.172, 0.0, -0.243, 0.172, 0.172,
       0.172, 0.0, -0.243, 0.172, 0.172;
  return r;
}

Eigen::MatrixXd printed_redundancy_cycle() { return printed_redundancy_a(); }

std::string cycle_script() {
  return "rxu 1\n"
         "# A -> B: brace between nodes 2 and 4, inserted as element 3\n"
         "add at 3 c 141.42135623730951 row -0.70710678118654757 0.70710678118654757 0 0\n"
         "# B -> C\n"
         "remove 4\n"
         "# C -> A\n"
         "exchange 3 c 200 row 0 0 0 1\n";
}

}  // namespace redmx::fixtures
