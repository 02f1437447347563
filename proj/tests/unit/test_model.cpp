#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "epi/errors.hpp"
#include "epi/model.hpp"
#include "support/model_cases.hpp"

using namespace epi;

using oracle::flat_params;
using oracle::rel;
using oracle::small_config;
using oracle::to_instance;

TEST_CASE("lambda_at looks up the segment containing the day") {
    CHECK(lambda_at(9, {2.0, 3.0}, {1, 10, 20}) == 2.0);
    CHECK(lambda_at(10, {2.0, 3.0}, {1, 10, 20}) == 3.0);
    CHECK(lambda_at(19, {2.0, 3.0}, {1, 10, 20}) == 3.0);
    for (int t = 1; t < 30; ++t) CHECK(lambda_at(t, {0.7}, {1, 30}) == 0.7);
    CHECK_THROWS_AS(lambda_at(20, {2.0, 3.0}, {1, 10, 20}), RangeError);
    CHECK_THROWS_AS(lambda_at(0, {2.0, 3.0}, {1, 10, 20}), RangeError);
}

TEST_CASE("births per day") {
    CHECK(births_per_day(365.0, 1.0) == doctest::Approx(1.0));
    CHECK(births_per_day(1049839.0, 10.0) == doctest::Approx(287.63).epsilon(1e-4));
    CHECK(births_per_day(0.062 * 67886011.0, 5.0) == doctest::Approx(2306.2).epsilon(1e-4));
    CHECK_THROWS_AS(births_per_day(10.0, 0.0), ParameterError);
}

TEST_CASE("vaccination term windows") {
    const std::vector<double> rho(200, 100.0);
    for (int t = 1; t <= 14; ++t) CHECK(vaccination_term(rho, t, 0.4, 0.1, 200, 2) == 0.0);
    CHECK(vaccination_term(rho, 20, 0.4, 0.1, 200, 2) == doctest::Approx(40.0));
    CHECK(vaccination_term(rho, 40, 0.4, 0.1, 200, 2) == doctest::Approx(50.0));
    CHECK(vaccination_term(rho, 197, 0.4, 0.1, 200, 2) == 0.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 500.0);
    std::vector<double> r(120);
    for (auto& v : r) v = U(rng);
    double total_v = 0.0, total_rho = 0.0;
    for (int t = 1; t <= 120; ++t) total_v += vaccination_term(r, t, 0.4, 0.1, 120, 2);
    for (double v : r) total_rho += v;
    CHECK(total_v <= 0.5 * total_rho);
}

TEST_CASE("SEIRS re-entry") {
    const auto rec = discretize_delay(DelaySpec::gamma(3.0, 0.2), 60);
    std::vector<double> C(60, 0.0), ones(60, 1.0), zeros(60, 0.0);
    C[0] = 1.0;
    for (int t = 2; t < 60; ++t) CHECK(seirs_reentry(C, zeros, rec, t) == doctest::Approx(rec(t - 1)).epsilon(1e-15));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 100.0);
    for (auto& c : C) c = U(rng);
    double total_r = 0.0, total_c = 0.0;
    for (int t = 2; t <= 60; ++t) {
        CHECK(seirs_reentry(C, ones, rec, t) == 0.0);
        total_r += seirs_reentry(C, zeros, rec, t);
    }
    for (double c : C) total_c += c;
    CHECK(total_r <= total_c);
}

TEST_CASE("zero infection rate leaves only the seed") {
    const auto c = small_config(40, 6, 2, 1e5);
    const auto paths = simulate_paths(flat_params(0.0, 10.0), c, {});
    REQUIRE(paths.feasible);
    for (int t = 1; t <= 8; ++t) CHECK(paths.at(paths.C, t) == 10.0);
    for (int t = 9; t <= 40; ++t) CHECK(paths.at(paths.C, t) == 0.0);
    for (int t = 9; t <= 40; ++t) CHECK(paths.at(paths.S, t) == paths.at(paths.S, 8));
}

TEST_CASE("small instance matches the scalar-loop oracle") {
    auto c = small_config(12, 2, 1, 1000.0);
    const auto p = flat_params(0.5, 10.0);
    const auto got = simulate_paths(p, c, {});
    const auto want = oracle::run(to_instance(c, p, {}));
    REQUIRE(got.feasible);
    for (int t = 1; t <= 12; ++t) {
        CHECK(rel(got.at(got.C, t), want.C[t]) <= 1e-12);
        CHECK(rel(got.at(got.S, t), want.S[t]) <= 1e-12);
        CHECK(rel(got.at(got.I, t), want.I[t]) <= 1e-12);
        CHECK(rel(got.at(got.Rs, t), want.R[t]) <= 1e-12);
        CHECK(rel(got.at(got.theta, t), want.theta[t]) <= 1e-12);
        CHECK(rel(got.at(got.Rt, t), want.Rt[t]) <= 1e-12);
    }
}

TEST_CASE("random instances over every flag combination match the oracle") {
    std::mt19937_64 rng(77);
    int compared = 0;
    for (int trial = 0; trial < 64; ++trial) {
        const auto rc = oracle::random_case(rng, trial % 16);
        const auto got = simulate_paths(rc.params, rc.config, rc.rho);
        const auto want = oracle::run(to_instance(rc.config, rc.params, rc.rho));
        const double err = oracle::max_path_error(got, want, rc.config.n);
        INFO("trial " << trial);
        CHECK(err >= 0.0);
        CHECK(err <= 1e-12);
        compared += want.ok ? 1 : 0;
    }
    CHECK(compared >= 32);
}

TEST_CASE("without extensions susceptibles fall by exactly the new cases") {
    const auto c = small_config(60, 6, 2, 1e6);
    const auto paths = simulate_paths(flat_params(0.35, 20.0), c, {});
    REQUIRE(paths.feasible);
    for (int t = c.tau; t <= c.update_end(); ++t)
        CHECK(paths.at(paths.S, t - 1) - paths.at(paths.S, t) == doctest::Approx(paths.at(paths.C, t)).epsilon(1e-12));
    for (int t = 2; t <= 60; ++t) CHECK(paths.at(paths.S, t) <= paths.at(paths.S, t - 1));
}

TEST_CASE("paths that exhaust the susceptibles are flagged, not clamped") {
    const auto c = small_config(80, 6, 2, 1e4);
    const auto paths = simulate_paths(flat_params(3.0, 50.0), c, {});
    CHECK_FALSE(paths.feasible);
    CHECK(paths.reason.find("negative") != std::string::npos);
}

TEST_CASE("more vaccination never raises susceptibles") {
    auto c = small_config(80, 6, 2, 1e6, {true, true, false, false});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 300.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> low(80), high(80);
        for (std::size_t i = 0; i < 80; ++i) {
            low[i] = U(rng);
            high[i] = low[i] + U(rng);
        }
        const auto a = simulate_paths(flat_params(0.3, 10.0), c, low);
        const auto b = simulate_paths(flat_params(0.3, 10.0), c, high);
        REQUIRE(a.feasible);
        REQUIRE(b.feasible);
        for (int t = 1; t <= 80; ++t) CHECK(b.at(b.S, t) <= a.at(a.S, t) * (1.0 + 1e-15));
    }
}

TEST_CASE("births alone pull susceptibles back towards the population") {
    auto c = small_config(120, 6, 2, 1e4, {true, false, true, false});
    c.A = 50.0;
    const auto none = simulate_paths(flat_params(0.0, 0.0), c, {});
    REQUIRE(none.feasible);
    for (double s : none.S) CHECK(s == 1e4);

    const auto seeded = simulate_paths(flat_params(0.005, 40.0), c, {});
    INFO(seeded.reason);
    REQUIRE(seeded.feasible);
    for (int t = 20; t <= 120; ++t) {
        CHECK(seeded.at(seeded.S, t) >= seeded.at(seeded.S, t - 1));
        CHECK(seeded.at(seeded.S, t) <= 1e4);
    }
    CHECK(seeded.at(seeded.S, 100) > seeded.at(seeded.S, 20));
}

TEST_CASE("reproduction number") {
    auto c = small_config(30, 6, 2, 1000.0);
    ParamVector p = flat_params(0.3, 1.0);
    LatentPaths paths;
    paths.S.assign(30, 1000.0);
    for (double r : reproduction_series(paths, p, c)) CHECK(r == doctest::Approx(0.3 * 6));
    paths.S.assign(30, 500.0);
    for (double r : reproduction_series(paths, p, c)) CHECK(r == doctest::Approx(0.9));
    paths.S.assign(30, 250.0);
    for (double r : reproduction_series(paths, p, c)) CHECK(r == doctest::Approx(0.45));
}

TEST_CASE("model names and configuration checks") {
    for (const char* name : {"sir", "seir", "sir.vacc", "seir.vacc.dem", "seir.vacc.dem.seirs"})
        CHECK(to_string(model_flags_from_string(name)) == name);
    CHECK_THROWS_AS(model_flags_from_string("sis"), ParameterError);
    CHECK_THROWS_AS(model_flags_from_string("seir.boost"), ParameterError);
    CHECK(likelihood_from_string("poisexp") == Likelihood::poisson_exp);
    CHECK_THROWS_AS(likelihood_from_string("gauss"), ParameterError);

    auto c = small_config(40, 6, 2, 1e5);
    CHECK_NOTHROW(c.validate());
    c.changepoints = {1, 20, 38};
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = small_config(40, 6, 2, 1e5);
    c.a1 = 0.8;
    c.a2 = 0.3;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = small_config(40, 6, 2, 1e5, {true, false, false, true});
    CHECK_THROWS_AS(c.validate(), ParameterError);
}
