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

#include "redmx/scalable.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "redmx/errors.hpp"
#include "redmx/redundancy.hpp"

namespace redmx {
namespace {

TEST(ScalableTruss, CountsForSmallK) {
  for (int k = 1; k <= 5; ++k) {
    const StructuralModel m = generate_scalable_truss(k);
    const SystemMatrices sys = assemble_system(m);
    const Index k3 = static_cast<Index>(k) * k * k;
    EXPECT_EQ(static_cast<Index>(m.elements.size()), 5 * k3);
    EXPECT_EQ(sys.dofs(), 3 * k3);
    EXPECT_EQ(check_kinematic_determinacy(sys), 2 * k3);
    EXPECT_EQ(m.dimension, 3);
  }
}

TEST(ScalableTruss, ReferenceRows) {
  const StructuralModel k4 = generate_scalable_truss(4);
  EXPECT_EQ(k4.elements.size(), 320u);
  EXPECT_EQ(DofMap::build(k4).size(), 192);
  const StructuralModel k1 = generate_scalable_truss(1);
  EXPECT_EQ(k1.elements.size(), 5u);
  EXPECT_EQ(DofMap::build(k1).size(), 3);
}

TEST(ScalableTruss, UniformAxialStiffnessAndSupports) {
  const int k = 3;
  const StructuralModel m = generate_scalable_truss(k);
  for (const auto& e : m.elements) {
    EXPECT_DOUBLE_EQ(e.youngs_modulus * e.area, 200.0);
  }
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; j <= k; ++j) {
      for (int l = 0; l <= k; ++l) {
        const Node& n = m.node(lattice_node_id(k, i, j, l));
        EXPECT_EQ(n.coords, Eigen::Vector3d(i, j, l));
        const bool boundary = i == 0 || j == 0 || l == 0;
        EXPECT_EQ(n.fully_fixed(3), boundary);
      }
    }
  }
}

TEST(ScalableTruss, RejectsNonPositiveK) { EXPECT_THROW(generate_scalable_truss(0), ModelError); }

TEST(Frame, ThreeRedundanciesPerStorey) {
  for (int s = 1; s <= 4; ++s) {
    const SystemMatrices sys = assemble_system(generate_frame(s));
    EXPECT_EQ(check_kinematic_determinacy(sys), 3 * s);
  }
}

TEST(Frame, SlabSystemCarriesNoRedundancy) {
  const int storeys = 3;
  const SystemState state = SystemState::build(assemble_system(generate_frame(storeys)));
  const RedundancyReport rep = make_report(state);
  std::set<int> zero(rep.zero_redundancy_ids.begin(), rep.zero_redundancy_ids.end());
  for (int s = 1; s <= storeys; ++s) {
    EXPECT_TRUE(zero.count(3 * storeys + 2 * s - 1)) << s;
    EXPECT_TRUE(zero.count(3 * storeys + 2 * s)) << s;
    EXPECT_FALSE(zero.count(3 * s)) << s;
  }
}

TEST(Frame, BracesAddOneEach) {
  const int storeys = 3;
  StructuralModel m = generate_frame(storeys);
  const std::vector<Element> braces = frame_braces(storeys);
  ASSERT_EQ(braces.size(), 3u);
  m.elements.insert(m.elements.end(), braces.begin(), braces.end());
  EXPECT_EQ(check_kinematic_determinacy(assemble_system(m)), 4 * storeys);
}

TEST(Slope, ExactPowerLaws) {
  const std::vector<double> n_e{320, 1080, 2560, 5000, 8640};
  std::vector<double> square;
  std::vector<double> cube;
  for (double x : n_e) {
    square.push_back(x * x);
    cube.push_back(3.5 * x * x * x);
  }
  EXPECT_NEAR(fit_loglog_slope(n_e, square), 2.0, 1e-6);
  EXPECT_NEAR(fit_loglog_slope(n_e, cube), 3.0, 1e-6);
}

TEST(Slope, RejectsDegenerateInput) {
  const std::vector<double> n_e{1, 2, 3, 4};
  EXPECT_THROW(fit_loglog_slope(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}),
               ModelError);
  EXPECT_THROW(fit_loglog_slope(std::vector<double>{5, 5, 5, 5}, std::vector<double>{1, 2, 3, 4}),
               ModelError);
  EXPECT_THROW(fit_loglog_slope(n_e, std::vector<double>{1, 0, 3, 4}), ModelError);
  EXPECT_THROW(fit_loglog_slope(n_e, std::vector<double>{1, 2, 3}), ModelError);
}

TEST(Slope, FromRecords) {
  std::vector<BenchRecord> records;
  for (int k = 2; k <= 6; ++k) {
    BenchRecord r;
    r.k = k;
    r.n_e = 5 * k * k * k;
    const double n_e = static_cast<double>(r.n_e);
    r.t_recompute_ms = 1e-6 * n_e * n_e * n_e;
    r.t_add_ms = 1e-4 * n_e * n_e;
    r.t_remove_ms = 2e-4 * n_e * n_e;
    r.t_exchange_ms = 1.5e-4 * n_e * n_e;
    records.push_back(r);
  }
  EXPECT_NEAR(fit_loglog_slope(records, Series::Recompute), 3.0, 1e-9);
  EXPECT_NEAR(fit_loglog_slope(records, Series::Remove), 2.0, 1e-9);
  records[0].t_add_ms = std::numeric_limits<double>::quiet_NaN();
  EXPECT_NEAR(fit_loglog_slope(records, Series::Add), 2.0, 1e-9);
}

TEST(Slope, Labels) {
  EXPECT_EQ(slope_label(2.0), "~quadratic");
  EXPECT_EQ(slope_label(1.6), "~quadratic");
  EXPECT_EQ(slope_label(2.4), "~quadratic");
  EXPECT_EQ(slope_label(3.1), "~cubic");
  EXPECT_EQ(slope_label(2.5), "other");
  EXPECT_EQ(slope_label(1.0), "other");
  EXPECT_EQ(series_name(Series::Exchange), "exchange");
}

TEST(BenchConfig, Validation) {
  BenchConfig c;
  c.k_values = {4};
  c.repetitions = 3;
  EXPECT_NO_THROW(validate(c));
  c.repetitions = 2;
  EXPECT_THROW(validate(c), ModelError);
  c.repetitions = 3;
  c.k_values = {1};
  EXPECT_THROW(validate(c), ModelError);
  c.k_values = {};
  EXPECT_THROW(validate(c), ModelError);
}

TEST(RunBenchmark, SingleRecordWithAllScenarios) {
  BenchConfig c;
  c.k_values = {4};
  c.repetitions = 3;
  int calls = 0;
  const auto records = run_benchmark(c, [&](const BenchRecord&) { ++calls; });
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(calls, 1);
  const BenchRecord& r = records[0];
  EXPECT_EQ(r.k, 4);
  EXPECT_EQ(r.n_e, 320);
  EXPECT_EQ(r.n, 192);
  EXPECT_TRUE(r.gate_checked);
  for (double t : {r.t_recompute_ms, r.t_add_ms, r.t_remove_ms, r.t_exchange_ms}) {
    EXPECT_TRUE(std::isfinite(t));
    EXPECT_GT(t, 0.0);
  }
  EXPECT_LT(r.t_add_ms, r.t_recompute_ms);
}

TEST(RunBenchmark, ScenarioSelectsSeries) {
  BenchConfig c;
  c.k_values = {2, 3};
  c.repetitions = 3;
  c.scenario = Scenario::Add;
  c.verify = true;
  const auto records = run_benchmark(c);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_TRUE(records[0].gate_checked);
  EXPECT_FALSE(records[1].gate_checked);
  EXPECT_TRUE(std::isfinite(records[0].t_add_ms));
  EXPECT_TRUE(std::isnan(records[0].t_remove_ms));
  EXPECT_TRUE(std::isnan(records[0].t_exchange_ms));
}

TEST(BenchTable, HeaderAndRows) {
  BenchRecord r;
  r.k = 4;
  r.n_e = 320;
  r.n = 192;
  r.t_recompute_ms = 10.0;
  r.t_add_ms = 0.5;
  r.t_remove_ms = 0.8;
  r.t_exchange_ms = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream out;
  const BenchRecord rs[] = {r};
  write_bench_table(out, rs);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("k\tn_e\tn\tt_recompute_ms\tt_add_ms\tt_remove_ms\tt_exchange_ms", 0), 0u);
  EXPECT_NE(text.find("\n4\t320\t192\t10.000\t0.500\t0.800\t-"), std::string::npos);

  std::ostringstream plot;
  write_gnuplot(plot, rs);
  EXPECT_NE(plot.str().find("320"), std::string::npos);
}

}  // namespace
}  // namespace redmx
