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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "redmx/errors.hpp"
#include "redmx/redundancy.hpp"
#include "redmx/woodbury.hpp"

namespace redmx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Element bar(int id, int a, int b) {
  Element e;
  e.id = id;
  e.kind = ElementKind::Truss;
  e.node_ids = {a, b};
  e.youngs_modulus = 200.0;
  e.area = 1.0;
  return e;
}

Element beam(int id, int a, int b) {
  Element e = bar(id, a, b);
  e.kind = ElementKind::PlaneBeam;
  e.moment_of_inertia = 0.01;
  return e;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool timed(Scenario scenario, Scenario op) {
  return scenario == Scenario::All || scenario == op;
}

void run_cycle(SystemState& state, std::vector<int>& interior, std::mt19937_64& rng,
               Scenario scenario, bool verify, std::vector<double>* t_add,
               std::vector<double>* t_remove, std::vector<double>* t_exchange) {
  std::uniform_int_distribution<std::size_t> pick(0, interior.size() - 1);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  auto check = [&] {
    if (verify) verify_against_oracle(state);
  };

  if (scenario != Scenario::Exchange) {
    const std::size_t slot = pick(rng);
    const int original = interior[slot];
    ElementBlock duplicate = state.sys.block(state.sys.position_of(original));
    duplicate.id = 0;
    auto start = Clock::now();
    const int copy = update_add(state, std::move(duplicate));
    const double add_ms = elapsed_ms(start);
    check();
    const std::size_t position = state.sys.position_of(original);
    start = Clock::now();
    update_remove(state, position);
    const double remove_ms = elapsed_ms(start);
    check();
    interior[slot] = copy;
    if (t_add != nullptr && timed(scenario, Scenario::Add)) t_add->push_back(add_ms);
    if (t_remove != nullptr && timed(scenario, Scenario::Remove)) t_remove->push_back(remove_ms);
  }
  if (timed(scenario, Scenario::Exchange)) {
    const int target = interior[pick(rng)];
    const std::size_t position = state.sys.position_of(target);
    ElementBlock replacement = state.sys.block(position);
    replacement.stiffness *= scale(rng);
    const auto start = Clock::now();
    update_exchange(state, position, std::move(replacement));
    const double exchange_ms = elapsed_ms(start);
    check();
    if (t_exchange != nullptr) t_exchange->push_back(exchange_ms);
  }
}

}  // namespace

int lattice_node_id(int k, int i, int j, int l) {
  return 1 + i + (k + 1) * (j + (k + 1) * l);
}

StructuralModel generate_scalable_truss(int k) {
  if (k < 1) throw ModelError("k must be at least 1");
  StructuralModel m;
  m.dimension = 3;
  for (int l = 0; l <= k; ++l) {
    for (int j = 0; j <= k; ++j) {
      for (int i = 0; i <= k; ++i) {
        Node n;
        n.id = lattice_node_id(k, i, j, l);
        n.coords = Eigen::Vector3d(i, j, l);
        const bool fixed = i == 0 || j == 0 || l == 0;
        n.fixed = {fixed, fixed, fixed};
        m.nodes.push_back(n);
      }
    }
  }
  int id = 1;
  for (int l = 1; l <= k; ++l) {
    for (int j = 1; j <= k; ++j) {
      for (int i = 1; i <= k; ++i) {
        const int self = lattice_node_id(k, i, j, l);
        m.elements.push_back(bar(id++, lattice_node_id(k, i - 1, j, l), self));
        m.elements.push_back(bar(id++, lattice_node_id(k, i, j - 1, l), self));
        m.elements.push_back(bar(id++, lattice_node_id(k, i, j, l - 1), self));
        m.elements.push_back(bar(id++, lattice_node_id(k, i - 1, j - 1, l), self));
        m.elements.push_back(bar(id++, lattice_node_id(k, i, j - 1, l - 1), self));
      }
    }
  }
  return m;
}

StructuralModel generate_frame(int storeys) {
  if (storeys < 1) throw ModelError("a frame needs at least one storey");
  constexpr double kWidth = 6.0;
  constexpr double kHeight = 3.0;
  constexpr double kOverhang = 2.0;
  StructuralModel m;
  m.dimension = 2;
  auto node = [&](int id, double x, double y, bool fixed) {
    Node n;
    n.id = id;
    n.coords = Eigen::Vector3d(x, y, 0.0);
    n.fixed = {fixed, fixed, false};
    n.fixed_rotation = fixed;
    m.nodes.push_back(n);
  };
  const int outer = 2 * storeys + 3;
  for (int s = 0; s <= storeys; ++s) {
    node(2 * s + 1, 0.0, s * kHeight, s == 0);
    node(2 * s + 2, kWidth, s * kHeight, s == 0);
    node(outer + s, kWidth + kOverhang, s * kHeight, s == 0);
  }
  for (int s = 1; s <= storeys; ++s) {
    m.elements.push_back(beam(3 * s - 2, 2 * s - 1, 2 * s + 1));
    m.elements.push_back(beam(3 * s - 1, 2 * s, 2 * s + 2));
    m.elements.push_back(beam(3 * s, 2 * s + 1, 2 * s + 2));
  }
  for (int s = 1; s <= storeys; ++s) {
    m.elements.push_back(bar(3 * storeys + 2 * s - 1, 2 * s + 2, outer + s));
    m.elements.push_back(bar(3 * storeys + 2 * s, outer + s - 1, outer + s));
  }
  return m;
}

std::vector<Element> frame_braces(int storeys) {
  std::vector<Element> braces;
  for (int s = 1; s <= storeys; ++s) braces.push_back(bar(5 * storeys + s, 2 * s - 1, 2 * s + 2));
  return braces;
}

void validate(const BenchConfig& config) {
  if (config.k_values.empty()) throw ModelError("no k values given");
  for (int k : config.k_values) {
    if (k < 2) throw ModelError("k must be at least 2, got " + std::to_string(k));
  }
  if (config.repetitions < 3) throw ModelError("at least 3 repetitions are required");
  if (config.warmup < 0) throw ModelError("warmup must be nonnegative");
}

std::vector<BenchRecord> run_benchmark(const BenchConfig& config,
                                       const std::function<void(const BenchRecord&)>& progress) {
  validate(config);
  const int smallest = *std::min_element(config.k_values.begin(), config.k_values.end());
  std::mt19937_64 rng(config.seed);
  std::vector<BenchRecord> records;
  for (int k : config.k_values) {
    const StructuralModel model = generate_scalable_truss(k);
    const SystemMatrices sys = assemble_system(model);
    std::vector<int> interior;
    for (const auto& e : model.elements) {
      if (!model.node(e.node_ids[0]).fully_fixed(3) && !model.node(e.node_ids[1]).fully_fixed(3)) {
        interior.push_back(e.id);
      }
    }

    BenchRecord r;
    r.k = k;
    r.n_e = static_cast<Index>(sys.element_count());
    r.n = sys.dofs();
    r.n_q = sys.rows();

    std::vector<double> t_recompute;
    SystemState state;
    for (int rep = 0; rep < config.repetitions; ++rep) {
      state = SystemState();
      const auto start = Clock::now();
      state = SystemState::build(sys);
      t_recompute.push_back(elapsed_ms(start));
    }

    std::vector<double> t_add;
    std::vector<double> t_remove;
    std::vector<double> t_exchange;
    for (int w = 0; w < config.warmup; ++w) {
      run_cycle(state, interior, rng, config.scenario, false, nullptr, nullptr, nullptr);
    }
    for (int rep = 0; rep < config.repetitions; ++rep) {
      run_cycle(state, interior, rng, config.scenario, config.verify, &t_add, &t_remove,
                &t_exchange);
    }
    if (k == smallest) {
      try {
        verify_against_oracle(state);
      } catch (const OracleMismatch& e) {
        throw BenchGateFailed("correctness gate failed at k = " + std::to_string(k) + ": " +
                              e.what());
      }
      r.gate_checked = true;
    }

    r.t_recompute_ms = median(t_recompute);
    r.t_add_ms = median(t_add);
    r.t_remove_ms = median(t_remove);
    r.t_exchange_ms = median(t_exchange);
    r.mean_recompute_ms = mean(t_recompute);
    r.mean_add_ms = mean(t_add);
    r.mean_remove_ms = mean(t_remove);
    r.mean_exchange_ms = mean(t_exchange);
    records.push_back(r);
    if (progress) progress(r);
  }
  return records;
}

double fit_loglog_slope(std::span<const double> n_e, std::span<const double> times) {
  if (n_e.size() != times.size()) throw ModelError("slope fit: size mismatch");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < n_e.size(); ++i) {
    if (n_e[i] > 0.0 && times[i] > 0.0 && std::isfinite(times[i])) {
      x.push_back(std::log(n_e[i]));
      y.push_back(std::log(times[i]));
    }
  }
  if (x.size() < 4) throw ModelError("slope fit needs at least 4 positive points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ModelError("slope fit is degenerate: all sizes equal");
  if (!(syy > 0.0)) throw ModelError("slope fit is degenerate: all times equal");
  return sxy / sxx;
}

double fit_loglog_slope(std::span<const BenchRecord> records, Series series) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& r : records) {
    x.push_back(static_cast<double>(r.n_e));
    switch (series) {
      case Series::Recompute: y.push_back(r.t_recompute_ms); break;
      case Series::Add: y.push_back(r.t_add_ms); break;
      case Series::Remove: y.push_back(r.t_remove_ms); break;
      case Series::Exchange: y.push_back(r.t_exchange_ms); break;
    }
  }
  return fit_loglog_slope(x, y);
}

std::string slope_label(double slope) {
  if (slope >= 1.6 && slope <= 2.4) return "~quadratic";
  if (slope >= 2.6 && slope <= 3.4) return "~cubic";
  return "other";
}

std::string series_name(Series series) {
  switch (series) {
    case Series::Recompute: return "recompute";
    case Series::Add: return "add";
    case Series::Remove: return "remove";
    case Series::Exchange: return "exchange";
  }
  return "";
}

void write_bench_table(std::ostream& out, std::span<const BenchRecord> records) {
  out << "k\tn_e\tn\tt_recompute_ms\tt_add_ms\tt_remove_ms\tt_exchange_ms\tspeedup_add\t"
         "speedup_remove\tspeedup_exchange\n";
  auto cell = [](double v, const char* format) {
    if (!std::isfinite(v)) return std::string("-");
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), format, v);
    return std::string(buffer);
  };
  for (const auto& r : records) {
    out << r.k << '\t' << r.n_e << '\t' << r.n << '\t' << cell(r.t_recompute_ms, "%.3f") << '\t'
        << cell(r.t_add_ms, "%.3f") << '\t' << cell(r.t_remove_ms, "%.3f") << '\t'
        << cell(r.t_exchange_ms, "%.3f") << '\t' << cell(r.speedup_add(), "%.2f") << '\t'
        << cell(r.speedup_remove(), "%.2f") << '\t' << cell(r.speedup_exchange(), "%.2f")
        << '\n';
  }
}

void write_gnuplot(std::ostream& out, std::span<const BenchRecord> records) {
  out << "# n_e t_recompute_ms t_add_ms t_remove_ms t_exchange_ms\n";
  for (const auto& r : records) {
    out << r.n_e << ' ' << r.t_recompute_ms << ' ' << r.t_add_ms << ' ' << r.t_remove_ms << ' '
        << r.t_exchange_ms << '\n';
  }
}

}  // namespace redmx
