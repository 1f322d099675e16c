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

// Recomputation against single-element updates on the scalable truss.
// Arguments are lattice sizes k.

#include <cstddef>
#include <random>

#include <benchmark/benchmark.h>

#include "redmx/redundancy.hpp"
#include "redmx/scalable.hpp"
#include "redmx/woodbury.hpp"

namespace {

redmx::SystemState build_state(int k) {
  return redmx::SystemState::build(redmx::assemble_system(redmx::generate_scalable_truss(k)));
}

std::size_t interior(std::mt19937_64& rng, const redmx::SystemState& state) {
  std::uniform_int_distribution<std::size_t> pick(0, state.sys.element_count() - 1);
  return pick(rng);
}

void set_counters(benchmark::State& bench, const redmx::SystemState& state) {
  bench.counters["n_e"] = static_cast<double>(state.sys.element_count());
  bench.counters["n"] = static_cast<double>(state.dofs());
}

void BM_Recompute(benchmark::State& bench) {
  redmx::SystemState state = build_state(static_cast<int>(bench.range(0)));
  for (auto _ : bench) {
    state.refresh();
    benchmark::DoNotOptimize(state.redundancy(0, 0));
  }
  set_counters(bench, state);
}

void BM_Add(benchmark::State& bench) {
  redmx::SystemState state = build_state(static_cast<int>(bench.range(0)));
  std::mt19937_64 rng(1);
  for (auto _ : bench) {
    redmx::ElementBlock dup = state.sys.block(interior(rng, state));
    dup.id = 0;
    redmx::update_add(state, dup);
    bench.PauseTiming();
    redmx::update_remove(state, state.sys.element_count() - 1);
    bench.ResumeTiming();
  }
  set_counters(bench, state);
}

void BM_Remove(benchmark::State& bench) {
  redmx::SystemState state = build_state(static_cast<int>(bench.range(0)));
  std::mt19937_64 rng(2);
  for (auto _ : bench) {
    bench.PauseTiming();
    redmx::ElementBlock dup = state.sys.block(interior(rng, state));
    dup.id = 0;
    redmx::update_add(state, dup);
    bench.ResumeTiming();
    redmx::update_remove(state, state.sys.element_count() - 1);
  }
  set_counters(bench, state);
}

void BM_Exchange(benchmark::State& bench) {
  redmx::SystemState state = build_state(static_cast<int>(bench.range(0)));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> factor(0.5, 2.0);
  for (auto _ : bench) {
    const std::size_t p = interior(rng, state);
    redmx::ElementBlock block = state.sys.block(p);
    block.stiffness *= factor(rng);
    redmx::update_exchange(state, p, block);
  }
  set_counters(bench, state);
}

}  // namespace

BENCHMARK(BM_Recompute)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Add)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Remove)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Exchange)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
