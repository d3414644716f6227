#include "lmg/dynamics.hpp"
#include "lmg/model.hpp"
#include "lmg/observables.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace lmg;

// 150 RK4 steps of the Dicke quench, N = range(0).
void BM_EffectiveDickeSteps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto space = HilbertSpace::dicke(n);
  const auto h = quench_hamiltonian(lmg_hamiltonian(space, 0.0, units::mhz(3.8)),
                                    collective_spin(space).sx, QuenchSchedule{});
  const auto psi = product_plus_state(space);
  const IntegratorConfig cfg{0.05, {0.0, 7.5}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_pure(h, psi, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 150);
}
BENCHMARK(BM_EffectiveDickeSteps)->Arg(6)->Arg(10)->Arg(20);

// 200 Lindblad steps on the six-qubit device with a truncated resonator.
void BM_CircuitQedLindbladSteps(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  const auto dev = paper_device_preset();
  const auto terms = circuit_qed_terms(dev, n_max);
  const auto h = quench_hamiltonian(terms.static_part, terms.drive_part, QuenchSchedule{});
  const auto noise = lindblad_operators(dev, NoiseSpec{true, true}, terms.static_part.space());
  const auto rho = product_plus_state(terms.static_part.space()).to_density();
  const IntegratorConfig cfg{0.005, {0.0, 1.0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_lindblad(h, rho, noise.ops, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_CircuitQedLindbladSteps)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_TransverseCorrelation(benchmark::State& state) {
  const auto space = HilbertSpace::full_spin(6);
  const auto rho = ghz_state(space).to_density();
  double beta = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transverse_correlation(rho, beta));
    beta += 0.01;
  }
}
BENCHMARK(BM_TransverseCorrelation);

void BM_WignerPoint(benchmark::State& state) {
  const auto space = HilbertSpace::full_spin(6);
  const auto rho = ghz_state(space).to_density();
  for (auto _ : state) {
    benchmark::DoNotOptimize(wigner_point(rho, 1.1, 0.4, true));
  }
}
BENCHMARK(BM_WignerPoint);

}  // namespace

BENCHMARK_MAIN();
