#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "epi/delay.hpp"
#include "epi/errors.hpp"

using namespace epi;

TEST_CASE("exponential delay: first mass covers [0, 1.5]") {
    const auto pmf = discretize_delay(DelaySpec::gamma(1.0, 1.0), 200);
    CHECK(pmf(1) == doctest::Approx(1.0 - std::exp(-1.5)).epsilon(1e-12));
    CHECK(pmf(1) == doctest::Approx(0.77687).epsilon(1e-5));
    for (int s = 2; s < 20; ++s)
        CHECK(pmf(s) == doctest::Approx(std::exp(-(s - 0.5)) - std::exp(-(s + 0.5))).epsilon(1e-12));
    CHECK(pmf(0) == 0.0);
    CHECK(pmf(500) == 0.0);
}

TEST_CASE("masses are non-negative, sum to at most one and approach one") {
    const auto spec = DelaySpec::infection_to_death_default();
    double previous = 0.0;
    for (int horizon : {10, 30, 60, 120, 400}) {
        const auto pmf = discretize_delay(spec, horizon);
        CHECK(pmf.size() == static_cast<std::size_t>(horizon - 1));
        for (double m : pmf.masses()) CHECK(m >= 0.0);
        CHECK(pmf.total() <= 1.0 + 1e-12);
        CHECK(pmf.total() >= previous);
        previous = pmf.total();
    }
    CHECK(previous == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("infection-to-death mean agrees with a Monte Carlo convolution") {
    const auto spec = DelaySpec::infection_to_death_default();
    const auto pmf = discretize_delay(spec, 600);

    std::mt19937_64 rng(20240611);
    std::gamma_distribution<double> onset(1.35, 1.0 / 0.27), death(4.94, 1.0 / 0.26);
    const int M = 1000000;
    double sum = 0.0;
    for (int i = 0; i < M; ++i) {
        const double x = onset(rng) + death(rng);
        sum += std::max(1.0, std::round(x));
    }
    const double mc_mean = sum / M;
    CHECK(std::fabs(pmf.mean() - mc_mean) < 0.1);
    CHECK(std::fabs(pmf.mean() - 24.0) < 0.1);
    CHECK(spec.mean() == doctest::Approx(1.35 / 0.27 + 4.94 / 0.26));
}

TEST_CASE("halving the convolution grid changes masses by less than 1e-8") {
    const auto spec = DelaySpec::gamma_sum({1.35, 0.27}, {4.94, 0.26});
    const auto coarse = discretize_delay(spec, 120, DelayKind::infection_to_death, 0.01);
    const auto fine = discretize_delay(spec, 120, DelayKind::infection_to_death, 0.005);
    double worst = 0.0;
    for (std::size_t s = 1; s <= coarse.size(); ++s) worst = std::max(worst, std::fabs(coarse(s) - fine(s)));
    CHECK(worst < 1e-8);
}

TEST_CASE("sum of two exponentials with equal rate matches the Gamma(2) closed form") {
    const auto pmf = discretize_delay(DelaySpec::gamma_sum({1.0, 0.5}, {1.0, 0.5}), 80);
    auto F = [](double t) { return 1.0 - std::exp(-0.5 * t) * (1.0 + 0.5 * t); };
    CHECK(pmf(1) == doctest::Approx(F(1.5)).epsilon(1e-8));
    for (int s = 2; s < 40; ++s) CHECK(std::fabs(pmf(s) - (F(s + 0.5) - F(s - 0.5))) < 1e-8);
}

TEST_CASE("invalid delay specifications are rejected") {
    CHECK_THROWS_AS(discretize_delay(DelaySpec::gamma(0.0, 1.0), 10), ParameterError);
    CHECK_THROWS_AS(discretize_delay(DelaySpec::gamma(1.0, -1.0), 10), ParameterError);
    CHECK_THROWS_AS(discretize_delay(DelaySpec::gamma(1.0, 1.0), 2), ParameterError);
    CHECK_THROWS_AS(discretize_delay(DelaySpec{}, 10), ParameterError);
}

TEST_CASE("concurrent first access builds one consistent table") {
    const auto spec = DelaySpec::gamma_sum({2.1, 0.31}, {3.3, 0.29});
    std::vector<DelayPMF> results(8);
#pragma omp parallel for
    for (int i = 0; i < 8; ++i) results[static_cast<std::size_t>(i)] = discretize_delay(spec, 90);
    for (const auto& r : results) CHECK(r.masses() == results.front().masses());
}
