#include <benchmark/benchmark.h>

#include <cmath>

#include "skinburst/dynamics.hpp"
#include "skinburst/spectral.hpp"
#include "skinburst/transfer.hpp"

using namespace skinburst;

namespace {

LatticeConfig ring(int N, double eta) {
    LatticeConfig c;
    c.N = N;
    c.eta = eta;
    c.impurities = {static_cast<int>(0.4 * N)};
    return validate_config(c);
}

void BM_Diagonalize(benchmark::State& state) {
    const Hamiltonian h = build_hamiltonian(ring(static_cast<int>(state.range(0)), 1e-3), Basis::CrossStitch);
    const bool vectors = state.range(1) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(diagonalize(h, vectors));
}
BENCHMARK(BM_Diagonalize)->ArgsProduct({{50, 100, 160}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
    const LatticeConfig c = ring(static_cast<int>(state.range(0)), 1e3);
    const SpectrumResult base = diagonalize(build_hamiltonian(c, Basis::CrossStitch), false);
    for (auto _ : state) {
        SpectrumResult r = base;
        classify_spectrum(r, c);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_Classify)->Arg(50)->Arg(160)->Unit(benchmark::kMicrosecond);

void BM_Reconstruct(benchmark::State& state) {
    const LatticeConfig c = ring(static_cast<int>(state.range(0)), 1e-3);
    SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), false);
    classify_spectrum(r, c);
    const Complex E = r.eigenvalues[*select_state(r, SpectralTag::RightLoop, StateSelector::MaxImag)];
    for (auto _ : state) benchmark::DoNotOptimize(reconstruct_eigenstate(E, c));
}
BENCHMARK(BM_Reconstruct)->Arg(50)->Arg(160)->Unit(benchmark::kMicrosecond);

void BM_RungeKuttaStep(benchmark::State& state) {
    const LatticeConfig c = ring(static_cast<int>(state.range(0)), std::exp(3.0));
    Propagator prop(build_hamiltonian(c, Basis::CrossStitch).data);
    ComplexVector psi = initial_state(c, c.N - 5);
    const double dt = kDefaultCourant / prop.row_sum_bound();
    for (auto _ : state) {
        prop.step(psi, dt);
        if (psi.norm() < 1e-6) psi = initial_state(c, c.N - 5);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RungeKuttaStep)->Arg(100)->Arg(400);

void BM_DissipationProfile(benchmark::State& state) {
    const LatticeConfig c = ring(100, std::exp(3.0));
    for (auto _ : state) benchmark::DoNotOptimize(dissipation_profile(c, 95));
}
BENCHMARK(BM_DissipationProfile)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
