// Serial reference vs OpenMP kernels on the default persona grid and a 10x larger one.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "psynth/calibrate.hpp"
#include "psynth/kernels.hpp"
#include "psynth/persona.hpp"
#include "psynth/schema.hpp"

using psynth::kernels::Exec;
using psynth::kernels::Layout;

namespace {

const std::vector<std::size_t>& radices(int grid) {
    static const std::vector<std::size_t> small = {9, 8, 5, 11, 4};
    static const std::vector<std::size_t> large = {9, 8, 5, 11, 4, 10};
    return grid == 0 ? small : large;
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = u(rng);
    }
    return v;
}

Exec exec_of(const benchmark::State& state) {
    return state.range(1) == 0 ? Exec::serial : Exec::parallel;
}

void label(benchmark::State& state, std::size_t n) {
    state.SetLabel(state.range(1) == 0 ? "serial" : "openmp");
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void BM_sum(benchmark::State& state) {
    const Layout layout(radices(static_cast<int>(state.range(0))));
    const auto v = random_values(layout.size(), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(psynth::kernels::sum(v, exec_of(state)));
    }
    label(state, layout.size());
}

void BM_marginal(benchmark::State& state) {
    const Layout layout(radices(static_cast<int>(state.range(0))));
    const auto v = random_values(layout.size(), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(psynth::kernels::marginal(v, layout, 2, exec_of(state)));
    }
    label(state, layout.size());
}

void BM_scale_by_category(benchmark::State& state) {
    const Layout layout(radices(static_cast<int>(state.range(0))));
    auto v = random_values(layout.size(), 3);
    std::vector<double> factors(layout.radix(3), 1.0);
    for (auto _ : state) {
        psynth::kernels::scale_by_category(v, layout, 3, factors, exec_of(state));
        benchmark::ClobberMemory();
    }
    label(state, layout.size());
}

void BM_group_response_sums(benchmark::State& state) {
    const Layout layout(radices(static_cast<int>(state.range(0))));
    const auto d = random_values(layout.size(), 4);
    const auto p = random_values(layout.size() * 5, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(psynth::kernels::group_response_sums(d, p, 5, layout, 0, exec_of(state)));
    }
    label(state, layout.size());
}

void BM_rescale_profiles(benchmark::State& state) {
    const Layout layout(radices(static_cast<int>(state.range(0))));
    auto p = random_values(layout.size() * 5, 6);
    const std::vector<double> factors(layout.radix(0) * 5, 1.0);
    for (auto _ : state) {
        psynth::kernels::rescale_profiles(p, 5, layout, 0, factors, exec_of(state));
        benchmark::ClobberMemory();
    }
    label(state, layout.size());
}

void BM_density_fit(benchmark::State& state) {
    const auto& schema = psynth::default_schema();
    const auto seed = psynth::enumerate_personas(schema);
    psynth::MarginalTargets targets(schema.attribute_count());
    std::mt19937_64 rng(7);
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
        auto w = random_values(schema.attribute(a).size(), rng());
        double total = 0.0;
        for (double x : w) {
            total += x;
        }
        for (double& x : w) {
            x /= total;
        }
        targets.set(a, w);
    }
    psynth::CalibrationOptions opts;
    opts.exec = exec_of(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(psynth::fit_densities_to_marginals(seed, targets, opts));
    }
    label(state, seed.size());
}

void grid_args(benchmark::internal::Benchmark* b) {
    for (int grid : {0, 1}) {
        for (int exec : {0, 1}) {
            b->Args({grid, exec});
        }
    }
}

} // namespace

BENCHMARK(BM_sum)->Apply(grid_args);
BENCHMARK(BM_marginal)->Apply(grid_args);
BENCHMARK(BM_scale_by_category)->Apply(grid_args);
BENCHMARK(BM_group_response_sums)->Apply(grid_args);
BENCHMARK(BM_rescale_profiles)->Apply(grid_args);
BENCHMARK(BM_density_fit)->Args({0, 0})->Args({0, 1});

BENCHMARK_MAIN();
