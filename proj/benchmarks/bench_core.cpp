// Microbenchmarks for the hot kernels: channel synthesis, rate evaluation,
// subproblem assembly, interior-point solves, and the two end-to-end
// algorithms at small scale.

#include <benchmark/benchmark.h>

#include <cstdint>

#include "irsmec/channel.hpp"
#include "irsmec/econ.hpp"
#include "irsmec/feasibility.hpp"
#include "irsmec/geometry.hpp"
#include "irsmec/signal.hpp"
#include "irsmec/sumratio.hpp"
#include "irsmec/types.hpp"

namespace {

using namespace irsmec;

void BM_GenerateChannels(benchmark::State& state) {
  const SystemGeometry g = default_geometry(4, 4, static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(generate_channels(g, seed++));
}
BENCHMARK(BM_GenerateChannels)->Arg(30)->Arg(120)->Unit(benchmark::kMicrosecond);

void BM_Rates(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ChannelSet ch = generate_channels(default_geometry(4, 4, n), 1);
  const PhaseVector phi = random_phases(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(rates(ch, phi));
}
BENCHMARK(BM_Rates)->Arg(30)->Arg(120)->Unit(benchmark::kMicrosecond);

void BM_BuildP8(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ChannelSet ch = generate_channels(default_geometry(4, 4, n), 1);
  const ReceiverBank bank = mmse_receivers(ch, random_phases(n, 2));
  const RVector floors = RVector::Constant(4, 2.1);
  for (auto _ : state) benchmark::DoNotOptimize(build_p8(ch, bank, floors));
}
BENCHMARK(BM_BuildP8)->Arg(30)->Arg(120)->Unit(benchmark::kMicrosecond);

void BM_SolveP8(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ChannelSet ch = generate_channels(default_geometry(4, 4, n), 1);
  const PhaseVector phi = random_phases(n, 2);
  const QcqpProblem p = build_p8(ch, mmse_receivers(ch, phi), RVector::Constant(4, 2.1));
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, {}, phi));
}
BENCHMARK(BM_SolveP8)->Arg(8)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_FeasibilityCheckSingle(benchmark::State& state) {
  const ChannelSet ch = generate_channels(default_geometry(4, 4, 30), 1);
  const PhaseVector phi0 = random_phases(30, 2);
  const RVector floors = RVector::Constant(4, 2.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(feasibility_check_single(ch, floors, phi0, {}));
}
BENCHMARK(BM_FeasibilityCheckSingle)->Unit(benchmark::kMillisecond);

void BM_OptimizeUnitCell(benchmark::State& state) {
  const ChannelSet ch = generate_channels(default_geometry(2, 2, 2), 1);
  OffloadEconomy eco;
  eco.edge_advantage = RVector::Constant(2, 1.0);
  eco.transmit_cost_scale = RVector::Constant(2, 1.0);
  eco.rate_floor = RVector::Zero(2);
  for (auto _ : state) benchmark::DoNotOptimize(optimize(ch, eco, {}));
}
BENCHMARK(BM_OptimizeUnitCell)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
