/*
   Copyright 2026 The stochflow Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "stochflow/galerkin_solver.hpp"
#include "stochflow/kernels.hpp"

namespace k = stochflow::kernels;

namespace {

std::vector<double> filled(std::size_t n, double phase) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(phase + 0.37 * static_cast<double>(i));
  return v;
}

// synthesis of a 2-D field: grid x modes matrix applied along axis 1 of an (outer, modes) block
template <k::Exec E>
void BM_apply_axis(benchmark::State& st) {
  const auto grid = static_cast<std::size_t>(st.range(0));
  const std::size_t modes = grid / 3;
  const auto A = filled(grid * modes, 0.1);
  const auto in = filled(grid * modes * grid, 0.2);
  std::vector<double> out(grid * grid * grid);
  for (auto _ : st) {
    k::apply_axis(E, A.data(), grid, modes, in.data(), grid, grid, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(grid * modes * grid * grid));
}

template <k::Exec E>
void BM_dot(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto a = filled(n, 0.3), b = filled(n, 0.4);
  for (auto _ : st) benchmark::DoNotOptimize(k::dot(E, a.data(), b.data(), n));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <k::Exec E>
void BM_multiply(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto a = filled(n, 0.5), b = filled(n, 0.6);
  std::vector<double> out(n);
  for (auto _ : st) {
    k::multiply(E, a.data(), b.data(), out.data(), n);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

// one desk-scale solver step (d = 2, n = 16, grid 48) under each kernel flavour
template <k::Exec E>
void BM_step(benchmark::State& st) {
  using namespace stochflow;
  SimulationSetup s;
  s.model = ConstitutiveModel::newtonian(0.05, 0.0);
  s.noise.K = 4;
  s.noise.amplitude = 0.5;
  s.initial.rho_low = 0.8;
  s.initial.rho_high = 1.2;
  s.initial.velocity_norm = 1.0;
  const Basis b(s.basis);
  const SolverState s0 = sample_initial_data(s.initial, b, {1, 0});
  const k::Exec saved = k::default_exec();
  k::set_default_exec(E);
  for (auto _ : st) {
    SolverState s1 = step_base(s0, s.solver, s.model, s.noise, b);
    benchmark::DoNotOptimize(s1.c.c.data());
  }
  k::set_default_exec(saved);
}

}  // namespace

BENCHMARK(BM_apply_axis<k::Exec::Serial>)->Arg(24)->Arg(48)->Arg(96);
BENCHMARK(BM_apply_axis<k::Exec::Parallel>)->Arg(24)->Arg(48)->Arg(96);
BENCHMARK(BM_dot<k::Exec::Serial>)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_dot<k::Exec::Parallel>)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_multiply<k::Exec::Serial>)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_multiply<k::Exec::Parallel>)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_step<k::Exec::Serial>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_step<k::Exec::Parallel>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
