#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cpmfit/conic.hpp"
#include "cpmfit/fit.hpp"
#include "cpmfit/metrics.hpp"
#include "cpmfit/superellipse.hpp"

namespace {

using namespace cpmfit;

const BetaVector kBeta{0.1, 0.9, 0.8, 0.1, 3.0};

std::vector<OperatingPoint> noisy_line(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<OperatingPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = kBeta.m_zs + (kBeta.m_ch - kBeta.m_zs) * (i + 0.5) / static_cast<double>(n);
        pts.push_back({m + noise(rng), pressure_at(kBeta, m) + noise(rng)});
    }
    return pts;
}

void BM_PressureAt(benchmark::State& state) {
    double m = kBeta.m_zs;
    const double step = (kBeta.m_ch - kBeta.m_zs) / 1024.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pressure_at(kBeta, m));
        m += step;
        if (m > kBeta.m_ch) m = kBeta.m_zs;
    }
}
BENCHMARK(BM_PressureAt);

void BM_OrthoSum(benchmark::State& state) {
    const auto pts = noisy_line(static_cast<std::size_t>(state.range(0)), 0.01, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ortho_sum(kBeta, pts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OrthoSum)->Arg(10)->Arg(20)->Arg(100);

void BM_FitSpeedline(benchmark::State& state) {
    const Speedline line(100.0, noisy_line(20, 0.01, 2));
    FitConfig cfg;
    cfg.init_strategy = static_cast<InitStrategy>(state.range(0));
    cfg.seed = 3;
    for (auto _ : state) benchmark::DoNotOptimize(fit_speedline(line, cfg).objective);
    state.SetLabel(std::string(to_string(cfg.init_strategy)));
}
BENCHMARK(BM_FitSpeedline)
    ->Arg(static_cast<int>(InitStrategy::None))
    ->Arg(static_cast<int>(InitStrategy::Pso))
    ->Arg(static_cast<int>(InitStrategy::De))
    ->Unit(benchmark::kMillisecond);

void BM_FitDirectConic(benchmark::State& state) {
    const auto pts = noisy_line(static_cast<std::size_t>(state.range(0)), 0.01, 4);
    for (auto _ : state) benchmark::DoNotOptimize(fit_direct_conic(pts));
}
BENCHMARK(BM_FitDirectConic)->Arg(20)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
