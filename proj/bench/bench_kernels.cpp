// OpenMP kernels against their serial reference implementations.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "epi/criteria.hpp"
#include "epi/endemicity.hpp"
#include "epi/gradient.hpp"
#include "epi/hmc.hpp"
#include "epi/loess.hpp"
#include "epi/posterior.hpp"
#include "epi/proportion.hpp"

namespace {

epi::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    epi::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

epi::FunctionTarget gaussian() {
    return epi::FunctionTarget(10, [](const epi::Vector& x) { return -0.5 * x.squaredNorm(); });
}

epi::SamplerConfig short_run() {
    epi::SamplerConfig c;
    c.warmup = 200;
    c.samples = 200;
    return c;
}

void BM_RunChains(benchmark::State& state) {
    const auto target = gaussian();
    for (auto _ : state) benchmark::DoNotOptimize(epi::run_chains(target, short_run(), 4));
}

void BM_RunChainsSerial(benchmark::State& state) {
    const auto target = gaussian();
    for (auto _ : state) benchmark::DoNotOptimize(epi::serial::run_chains(target, short_run(), 4));
}

void BM_Waic(benchmark::State& state) {
    const auto ll = random_matrix(4000, 300, -3.0, -0.5, 1);
    for (auto _ : state) benchmark::DoNotOptimize(epi::waic_terms(ll));
}

void BM_WaicSerial(benchmark::State& state) {
    const auto ll = random_matrix(4000, 300, -3.0, -0.5, 1);
    for (auto _ : state) benchmark::DoNotOptimize(epi::serial::waic_terms(ll));
}

std::pair<std::vector<double>, std::vector<double>> series(int n) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0.0, 0.05);
    std::vector<double> x, y;
    for (int t = 1; t <= n; ++t) {
        x.push_back(t);
        y.push_back(0.3 + 0.1 * std::sin(t / 20.0) + z(rng));
    }
    return {x, y};
}

void BM_Loess(benchmark::State& state) {
    const auto [x, y] = series(600);
    for (auto _ : state) benchmark::DoNotOptimize(epi::loess_smooth(x, y, 0.3));
}

void BM_LoessSerial(benchmark::State& state) {
    const auto [x, y] = series(600);
    for (auto _ : state) benchmark::DoNotOptimize(epi::serial::loess_smooth(x, y, 0.3));
}

void BM_Endemicity(benchmark::State& state) {
    const auto rates = random_matrix(4000, 300, 0.1, 0.5, 3);
    const auto sus = random_matrix(4000, 300, 1e5, 5e5, 4);
    for (auto _ : state) benchmark::DoNotOptimize(epi::endemicity_diagnostic(rates, sus, 6.0, 1e6));
}

void BM_EndemicitySerial(benchmark::State& state) {
    const auto rates = random_matrix(4000, 300, 0.1, 0.5, 3);
    const auto sus = random_matrix(4000, 300, 1e5, 5e5, 4);
    for (auto _ : state) benchmark::DoNotOptimize(epi::serial::endemicity_diagnostic(rates, sus, 6.0, 1e6));
}

std::vector<double> recorded(int days) {
    std::vector<double> c(static_cast<std::size_t>(days));
    for (int t = 0; t < days; ++t) c[static_cast<std::size_t>(t)] = 100.0 + t;
    return c;
}

void BM_Proportion(benchmark::State& state) {
    const auto total = random_matrix(4000, 300, 200.0, 2000.0, 5);
    const auto cases = recorded(300);
    for (auto _ : state) benchmark::DoNotOptimize(epi::observed_proportion(cases, total));
}

void BM_ProportionSerial(benchmark::State& state) {
    const auto total = random_matrix(4000, 300, 200.0, 2000.0, 5);
    const auto cases = recorded(300);
    for (auto _ : state) benchmark::DoNotOptimize(epi::serial::observed_proportion(cases, total));
}

epi::EpidemicPosterior epidemic(int n) {
    epi::ModelConfig c;
    c.n = n;
    c.N = 1e7;
    c.changepoints = epi::even_changepoints(n, c.exposed_days(), 3);
    c.ifr_breaks = {1, n + 1};
    c.death_delay = epi::discretize_delay(epi::DelaySpec::infection_to_death_default(), n);
    epi::PriorSpec p;
    p.ifr_means = {0.01};
    std::vector<double> deaths(static_cast<std::size_t>(n), 5.0);
    return epi::EpidemicPosterior(c, p, deaths);
}

void BM_GradientAnalytic(benchmark::State& state) {
    const auto post = epidemic(static_cast<int>(state.range(0)));
    std::mt19937_64 rng(1);
    const epi::Vector x = post.initial_point(rng);
    for (auto _ : state) benchmark::DoNotOptimize(post.gradient(x));
}

void BM_GradientFiniteDifference(benchmark::State& state) {
    const auto post = epidemic(static_cast<int>(state.range(0)));
    std::mt19937_64 rng(1);
    const epi::Vector x = post.initial_point(rng);
    for (auto _ : state) benchmark::DoNotOptimize(epi::finite_difference_gradient(post, x));
}

}  // namespace

BENCHMARK(BM_RunChains)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunChainsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Waic)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WaicSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Loess)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LoessSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Endemicity)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EndemicitySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Proportion)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProportionSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientAnalytic)->Arg(60)->Arg(150)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradientFiniteDifference)->Arg(60)->Arg(150)->Arg(400)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
