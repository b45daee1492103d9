// Serial reference vs OpenMP kernels on pool-sized inputs.

#include <benchmark/benchmark.h>

#include <numeric>

#include "deal/environment.hpp"
#include "deal/kernels.hpp"
#include "deal/random.hpp"

namespace {

deal::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    auto rng = deal::make_rng(seed, 0);
    deal::Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = deal::standard_normal(rng);
    return m;
}

std::vector<std::size_t> iota(std::size_t first, std::size_t count) {
    std::vector<std::size_t> v(count);
    std::iota(v.begin(), v.end(), first);
    return v;
}

deal::DiagonalGmm random_gmm(std::size_t components, std::size_t dims) {
    deal::DiagonalGmm g;
    g.log_weights.assign(components, -std::log(static_cast<double>(components)));
    g.means = random_matrix(components, dims, 3);
    g.variances = deal::Matrix(components, dims, 1.0);
    return g;
}

template <bool Parallel>
void BM_MinDistances(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_matrix(n, 32, 1);
    const auto anchors = iota(0, n / 10);
    const auto cands = iota(n / 10, n - n / 10);
    for (auto _ : state) {
        auto d = Parallel ? deal::min_distances(x, cands, anchors) : deal::reference::min_distances(x, cands, anchors);
        benchmark::DoNotOptimize(d.data());
    }
}

template <bool Parallel>
void BM_NearestCentroid(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_matrix(n, 32, 1);
    const auto c = random_matrix(10, 32, 2);
    const auto rows = iota(0, n);
    for (auto _ : state) {
        auto a = Parallel ? deal::nearest_centroid(x, rows, c) : deal::reference::nearest_centroid(x, rows, c);
        benchmark::DoNotOptimize(a.data());
    }
}

template <bool Parallel>
void BM_GmmLogDensity(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_matrix(n, 32, 1);
    const auto g = random_gmm(20, 32);
    const auto rows = iota(0, n);
    for (auto _ : state) {
        auto d = Parallel ? deal::gmm_log_density(g, x, rows) : deal::reference::gmm_log_density(g, x, rows);
        benchmark::DoNotOptimize(d.data());
    }
}

template <bool Parallel>
void BM_PolicySeeds(benchmark::State& state) {
    const auto env = deal::make_switching_env(2000, 4, 20, 200, 0.3, deal::NoiseModel::bernoulli, 1);
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(state.range(0)));
    std::iota(seeds.begin(), seeds.end(), 0);
    const auto policy = deal::PolicyConfig::rexp4(200);
    for (auto _ : state) {
        auto runs = Parallel ? deal::run_policy_seeds(env, policy, seeds)
                             : deal::reference::run_policy_seeds(env, policy, seeds);
        benchmark::DoNotOptimize(runs.data());
    }
}

}  // namespace

BENCHMARK(BM_MinDistances<false>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_MinDistances<true>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_NearestCentroid<false>)->Arg(4000);
BENCHMARK(BM_NearestCentroid<true>)->Arg(4000);
BENCHMARK(BM_GmmLogDensity<false>)->Arg(4000);
BENCHMARK(BM_GmmLogDensity<true>)->Arg(4000);
BENCHMARK(BM_PolicySeeds<false>)->Arg(16);
BENCHMARK(BM_PolicySeeds<true>)->Arg(16);

BENCHMARK_MAIN();
