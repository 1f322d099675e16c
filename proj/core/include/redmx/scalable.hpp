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

// Model generators and the recompute-versus-update timing harness.

#ifndef REDMX_SCALABLE_HPP_
#define REDMX_SCALABLE_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "redmx/model.hpp"

namespace redmx {

/// Spatial truss on a (k+1)^3 node lattice. Nodes on the planes x = 0,
/// y = 0 and z = 0 are fixed. Every free node (i, j, l) connects to
/// (i-1, j, l), (i, j-1, l), (i, j, l-1), (i-1, j-1, l) and (i, j-1, l-1),
/// giving n_e = 5k^3, n = 3k^3 and n_s = 2k^3. Unit spacing, E = 200, A = 1.
StructuralModel generate_scalable_truss(int k);

/// Node id of lattice point (i, j, l) in generate_scalable_truss(k).
int lattice_node_id(int k, int i, int j, int l);

/// Plane multi-storey frame: two clamped beam columns and one beam girder
/// per storey (3 redundancies per storey) with a truss slab-column system
/// hung on the right that carries no redundancy.
StructuralModel generate_frame(int storeys);

/// One diagonal truss brace per storey of generate_frame(storeys), with
/// ids following the frame's.
std::vector<Element> frame_braces(int storeys);

enum class Scenario { Add, Remove, Exchange, All };

struct BenchConfig {
  std::vector<int> k_values;
  int repetitions = 5;
  Scenario scenario = Scenario::All;
  int warmup = 1;
  std::uint64_t seed = 20240607;
  bool verify = false;  // oracle check after every timed update
};

struct BenchRecord {
  int k = 0;
  Index n_e = 0;
  Index n = 0;
  Index n_q = 0;
  // Median wall times in milliseconds; NaN when not measured.
  double t_recompute_ms = 0.0;
  double t_add_ms = 0.0;
  double t_remove_ms = 0.0;
  double t_exchange_ms = 0.0;
  // Means of the same samples.
  double mean_recompute_ms = 0.0;
  double mean_add_ms = 0.0;
  double mean_remove_ms = 0.0;
  double mean_exchange_ms = 0.0;
  bool gate_checked = false;

  double speedup_add() const { return t_recompute_ms / t_add_ms; }
  double speedup_remove() const { return t_recompute_ms / t_remove_ms; }
  double speedup_exchange() const { return t_recompute_ms / t_exchange_ms; }
};

/// Validates the configuration; throws ModelError.
void validate(const BenchConfig& config);

/// Runs every k in order. At the smallest k the updated state is checked
/// against recomputation before any timing is reported; a mismatch throws
/// BenchGateFailed. `progress` is called after each record.
std::vector<BenchRecord> run_benchmark(
    const BenchConfig& config,
    const std::function<void(const BenchRecord&)>& progress = {});

enum class Series { Recompute, Add, Remove, Exchange };

/// Least-squares slope of log(time) against log(n_e). Needs at least four
/// points with positive values; throws ModelError otherwise or when the fit
/// is degenerate.
double fit_loglog_slope(std::span<const double> n_e, std::span<const double> times);
double fit_loglog_slope(std::span<const BenchRecord> records, Series series);

/// "~quadratic" for [1.6, 2.4], "~cubic" for [2.6, 3.4], else "other".
std::string slope_label(double slope);

std::string series_name(Series series);

/// Tab-separated table with a header row.
void write_bench_table(std::ostream& out, std::span<const BenchRecord> records);
/// Whitespace-separated columns for gnuplot: n_e and the four medians.
void write_gnuplot(std::ostream& out, std::span<const BenchRecord> records);

}  // namespace redmx

#endif  // REDMX_SCALABLE_HPP_
