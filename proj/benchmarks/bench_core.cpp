#include <benchmark/benchmark.h>

#include "ionfilter/darkstate.hpp"
#include "ionfilter/dissipation.hpp"
#include "ionfilter/laguerre.hpp"

using namespace ionfilter;

namespace {

DriveConfig qubit_drives() {
  DriveConfig c;
  c.drive_j = {1, 0.2, 0.5};
  c.drive_m = {0, 0.2, 1.0};
  return c;
}

EmissionSpec emission() {
  EmissionSpec e;
  e.eta_e = 1.0;
  return e;
}

}  // namespace

static void BM_LaguerreZeros(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(laguerre::zeros(n, 1));
}
BENCHMARK(BM_LaguerreZeros)->Arg(5)->Arg(20)->Arg(40);

static void BM_MasterRhs(benchmark::State& state) {
  const FockSpace s(static_cast<int>(state.range(0)));
  const MasterEquation eq(build_interaction_hamiltonian(qubit_drives(), s), emission());
  const Matrix rho = embed(thermal_state(0.1, s).matrix());
  Matrix out;
  for (auto _ : state) {
    eq.rhs_hermitian(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_MasterRhs)->Arg(10)->Arg(30)->Arg(60);

static void BM_BuildLiouvillian(benchmark::State& state) {
  const FockSpace s(static_cast<int>(state.range(0)));
  const VibronicOperator h = build_interaction_hamiltonian(qubit_drives(), s);
  for (auto _ : state) benchmark::DoNotOptimize(build_liouvillian(h, emission(), s));
}
BENCHMARK(BM_BuildLiouvillian)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_SteadyNullspace(benchmark::State& state) {
  const FockSpace s(static_cast<int>(state.range(0)));
  const Matrix l = build_liouvillian(build_interaction_hamiltonian(qubit_drives(), s), emission(), s);
  for (auto _ : state) benchmark::DoNotOptimize(steady_state_nullspace(l, s));
}
BENCHMARK(BM_SteadyNullspace)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_DarkStateAdjacent(benchmark::State& state) {
  const FockSpace s(static_cast<int>(state.range(0)));
  const DriveConfig c = qubit_drives();
  for (auto _ : state) benchmark::DoNotOptimize(dark_coefficients_adjacent(c, s));
}
BENCHMARK(BM_DarkStateAdjacent)->Arg(30)->Arg(200);

static void BM_DarkSpaceBasis(benchmark::State& state) {
  const FockSpace s(static_cast<int>(state.range(0)));
  DriveConfig c;
  c.drive_j = {2, 0.2, 0.5};
  c.drive_m = {0, 0.004, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(dark_space_basis(c, s));
}
BENCHMARK(BM_DarkSpaceBasis)->Arg(20)->Arg(60);
BENCHMARK_MAIN();
