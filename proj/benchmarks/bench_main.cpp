#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "nemfp/fpke.hpp"
#include "nemfp/particles.hpp"
#include "nemfp/rng.hpp"
#include "nemfp/sde.hpp"
#include "nemfp/stats.hpp"

using namespace nemfp;

namespace {

CoefficientModel porous() {
    return make_model({Family::porous_regularized, 1.0, 0.5, true}, {Family::burgers_gauss, 0.5}, 0.5,
                      {Envelope::Kind::gauss, 3.0, std::sqrt(2.0)});
}

GridDensity gaussian(const Grid1D& g, double sd) {
    ProfileSpec s;
    s.kind = ProfileSpec::Kind::gaussian;
    s.sd = sd;
    return reference_profile(s, g);
}

std::vector<double> normal_positions(std::size_t n) {
    const CounterStream s(1);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * s.normal(i);
    return x;
}

}  // namespace

// 16 explicit steps on the porous model.
void BM_FpkeExplicit(benchmark::State& state) {
    const auto m = porous();
    const Grid1D g(-6.0, 6.0, static_cast<std::size_t>(state.range(0)));
    const auto u0 = gaussian(g, 0.5);
    const double dt = 0.5 * stable_dt(m, u0, 0.0);
    SchemeOptions o;
    o.snapshot_stride = 0;
    for (auto _ : state) benchmark::DoNotOptimize(solve_fpke(m, u0, 16 * dt, dt, o));
    state.SetItemsProcessed(state.iterations() * 16 * state.range(0));
}
BENCHMARK(BM_FpkeExplicit)->Arg(256)->Arg(1024);

void BM_FpkeSemiImplicit(benchmark::State& state) {
    const auto m = porous();
    const Grid1D g(-6.0, 6.0, static_cast<std::size_t>(state.range(0)));
    const auto u0 = gaussian(g, 0.5);
    SchemeOptions o;
    o.stepping = TimeStepping::semi_implicit;
    o.snapshot_stride = 0;
    for (auto _ : state) benchmark::DoNotOptimize(solve_fpke(m, u0, 16.0 / 512, 1.0 / 512, o));
    state.SetItemsProcessed(state.iterations() * 16 * state.range(0));
}
BENCHMARK(BM_FpkeSemiImplicit)->Arg(256)->Arg(1024);

void BM_SdeEnsemble(benchmark::State& state) {
    const auto m = porous();
    const Grid1D g(-6.0, 6.0, 512);
    SchemeOptions o;
    o.stepping = TimeStepping::semi_implicit;
    const auto sol = std::make_shared<const FpkeSolution>(solve_fpke(m, gaussian(g, 0.5), 0.25, 1.0 / 512, o));
    const auto frozen = freeze_coefficients(m, sol);
    EnsembleOptions eo;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ensemble_states(frozen, n, {0.25}, 3, eo));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 32);
}
BENCHMARK(BM_SdeEnsemble)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_DensityEstimate(benchmark::State& state) {
    const Grid1D g(-6.0, 6.0, 512);
    const ParticleEnsemble ens{normal_positions(static_cast<std::size_t>(state.range(1))), 0.0, 0};
    EstimatorConfig c;
    c.grid = g;
    c.kind = state.range(0) ? EstimatorKind::gaussian_kernel : EstimatorKind::histogram;
    for (auto _ : state) benchmark::DoNotOptimize(estimate_density(ens, c));
    state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_DensityEstimate)->Args({0, 50000})->Args({1, 50000});

void BM_W1(benchmark::State& state) {
    const Grid1D g(-6.0, 6.0, static_cast<std::size_t>(state.range(0)));
    const auto p = gaussian(g, 0.5);
    const auto q = gaussian(g, 0.7);
    for (auto _ : state) benchmark::DoNotOptimize(w1_distance(p, q));
}
BENCHMARK(BM_W1)->Arg(1024)->Arg(8192);
BENCHMARK_MAIN();
