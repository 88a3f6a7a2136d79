#include <benchmark/benchmark.h>

#include <random>

#include "fcs/bounds.hpp"
#include "fcs/fcs.hpp"
#include "fcs/models.hpp"

namespace {

void BM_Eigh(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const auto h = fcs::random_hermitian(n, 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fcs::eigh(h));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Eigh)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_FcsSetup(benchmark::State& state) {
  const auto sys = fcs::build_anderson(fcs::AndersonSpec::with_nearest_site_coupling(1, 0.5, 1.0, 0.5));
  const auto rho = fcs::gibbs_product_state(sys, 0.2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fcs::TwoTimeMeasurement(sys, rho));
}
BENCHMARK(BM_FcsSetup);

void BM_FcsDistribution(benchmark::State& state) {
  const auto sys = fcs::build_anderson(fcs::AndersonSpec::with_nearest_site_coupling(1, 0.5, 1.0, 0.5));
  const fcs::TwoTimeMeasurement protocol(sys, fcs::gibbs_product_state(sys, 0.2, 1.0));
  double t = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(protocol.distribution(t));
    t += 0.5;
  }
}
BENCHMARK(BM_FcsDistribution);

void BM_ComputeR(benchmark::State& state) {
  const auto sys = fcs::build_xy_lattice({1, 1.0, 0.5, fcs::kDefaultMaxDim});
  for (auto _ : state) benchmark::DoNotOptimize(fcs::compute_R(sys, 0.5, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ComputeR)->Arg(101)->Arg(201);

void BM_AndersonEigh(benchmark::State& state) {
  const auto sys = fcs::build_anderson(fcs::AndersonSpec::with_nearest_site_coupling(1, 0.5, 1.0, 0.5));
  const auto hv = sys.h_v();
  for (auto _ : state) benchmark::DoNotOptimize(fcs::eigh(hv));
}
BENCHMARK(BM_AndersonEigh);

}  // namespace

BENCHMARK_MAIN();
