#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "epi/annealing.hpp"
#include "epi/diagnostics.hpp"
#include "epi/gradient.hpp"
#include "epi/hmc.hpp"
#include "epi/loess.hpp"
#include "epi/observation.hpp"
#include "epi/optimize.hpp"
#include "epi/proportion.hpp"
#include "support/wls_oracle.hpp"

using namespace epi;

namespace {

FunctionTarget gaussian(int d) {
    return FunctionTarget(d, [](const Vector& x) { return -0.5 * x.squaredNorm(); });
}

double energy(const Vector& q, const Vector& p) { return 0.5 * q.squaredNorm() + 0.5 * p.squaredNorm(); }

double energy_error(double step, int steps) {
    const auto target = gaussian(5);
    const auto grad = finite_difference(target);
    Vector q(5), p(5);
    q << 0.7, -0.3, 1.1, 0.2, -0.9;
    p << 0.4, 1.0, -0.5, 0.3, 0.8;
    const double h0 = energy(q, p);
    Vector g = grad(q);
    REQUIRE(leapfrog(target, grad, q, p, g, step, steps, Vector::Ones(5)));
    return std::fabs(energy(q, p) - h0);
}

std::vector<std::vector<double>> normal_chains(int chains, int m, std::uint64_t seed, const std::vector<double>& means) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(chains));
    for (int c = 0; c < chains; ++c)
        for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(c)].push_back(means[static_cast<std::size_t>(c)] + z(rng));
    return out;
}

}  // namespace

TEST_CASE("finite-difference gradient") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vector x(4);
        for (int i = 0; i < 4; ++i) x[i] = z(rng);
        const Vector g = finite_difference_gradient([](const Vector& v) { return -0.5 * v.squaredNorm(); }, x);
        CHECK((g + x).cwiseAbs().maxCoeff() < 1e-6);
    }

    // d/dtheta of the NB log pmf: d / theta - (d + psi) / (theta + psi).
    Vector t(1);
    t << 2.0;
    const Vector g = finite_difference_gradient([](const Vector& v) { return negbin_logpmf(3.0, v[0], 1.0); }, t);
    CHECK(std::fabs(g[0] - (3.0 / 2.0 - 4.0 / 3.0)) < 1e-6);

    const Vector zero = Vector::Zero(3);
    const Vector q = finite_difference_gradient([](const Vector& v) { return -v.array().pow(4).sum(); }, zero);
    for (int i = 0; i < 3; ++i) CHECK(q[i] == 0.0);
}

TEST_CASE("gradient error names the coordinate") {
    Vector x(3);
    x << 0.0, 1.0, 0.0;
    try {
        finite_difference_gradient([](const Vector& v) { return v[1] > 1.0 ? -INFINITY : -v.squaredNorm(); }, x);
        FAIL("expected a gradient error");
    } catch (const GradientError& e) {
        CHECK(e.coordinate() == 1);
        CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
    }
}

TEST_CASE("leapfrog is second order") {
    // A single step has local error O(h^3); a fixed integration time has error O(h^2).
    const double one = energy_error(0.1, 1) / energy_error(0.05, 1);
    CHECK(one > 7.0);
    CHECK(one < 9.0);
    const double fixed = energy_error(0.1, 10) / energy_error(0.05, 20);
    CHECK(fixed > 3.5);
    CHECK(fixed < 4.5);
}

TEST_CASE("leapfrog is reversible") {
    const auto target = gaussian(3);
    const auto grad = finite_difference(target);
    Vector q(3), p(3);
    q << 0.3, -1.2, 0.5;
    p << -0.7, 0.1, 1.4;
    const Vector q0 = q, p0 = p;
    Vector g = grad(q);
    REQUIRE(leapfrog(target, grad, q, p, g, 0.2, 15, Vector::Ones(3)));
    p = -p;
    REQUIRE(leapfrog(target, grad, q, p, g, 0.2, 15, Vector::Ones(3)));
    CHECK((q - q0).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((p + p0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("HMC on a standard Gaussian") {
    const auto target = gaussian(5);
    SamplerConfig cfg;
    cfg.seed = 4;
    const auto chains = run_chains(target, cfg, 4);
    REQUIRE(chains.size() == 4);
    for (const auto& c : chains) {
        CHECK(c.size() == 1000);
        CHECK(c.acceptance >= 0.7);
        CHECK(c.acceptance <= 0.9);
        CHECK(c.divergences == 0);
    }
    const auto diag = diagnostics(chains);
    const auto all = merge_chains(chains);
    const boost::math::normal phi;
    for (int i = 0; i < 5; ++i) {
        REQUIRE(diag[static_cast<std::size_t>(i)].defined());
        const double ess = *diag[static_cast<std::size_t>(i)].ess_bulk;
        const auto col = all.draws.col(i);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
        CHECK(std::fabs(mean) < 3.0 * sd / std::sqrt(ess));
        CHECK(std::fabs(sd - 1.0) < 0.05);
        CHECK(*diag[static_cast<std::size_t>(i)].rhat < 1.01);

        // Kolmogorov-Smirnov at alpha = 0.01 with the ESS as the sample size.
        std::vector<double> v(col.begin(), col.end());
        std::sort(v.begin(), v.end());
        const double m = static_cast<double>(v.size());
        double dmax = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double f = cdf(phi, v[k]);
            dmax = std::max({dmax, (k + 1) / m - f, f - k / m});
        }
        CHECK(dmax * std::sqrt(ess) < 1.628);
    }
}

TEST_CASE("chains are reproducible and serial matches OpenMP") {
    const auto target = gaussian(3);
    SamplerConfig cfg;
    cfg.warmup = 200;
    cfg.samples = 200;
    cfg.seed = 99;
    const auto a = run_chains(target, cfg, 3);
    const auto b = run_chains(target, cfg, 3);
    const auto s = serial::run_chains(target, cfg, 3);
    CHECK(hash_draws(a) == hash_draws(b));
    CHECK(hash_draws(a) == hash_draws(s));
    for (std::size_t c = 0; c < 3; ++c) CHECK(a[c].draws == s[c].draws);
    cfg.seed = 100;
    CHECK(hash_draws(run_chains(target, cfg, 3)) != hash_draws(a));
}

TEST_CASE("sampler failures") {
    SamplerConfig cfg;
    cfg.warmup = 50;
    cfg.samples = 50;
    const FunctionTarget nowhere(2, [](const Vector&) { return -INFINITY; });
    CHECK_THROWS_AS(hmc_sample(nowhere, cfg), SamplerError);
    cfg.samples = 0;
    CHECK_THROWS_AS(hmc_sample(gaussian(2), cfg), ParameterError);
}

TEST_CASE("diagnostics") {
    const auto indep = normal_chains(4, 1000, 5, {0, 0, 0, 0});
    const auto d = diagnose(indep, "x");
    CHECK(*d.rhat < 1.01);
    CHECK(*d.ess_bulk >= 0.8 * 4000);

    CHECK(*diagnose(normal_chains(2, 1000, 6, {0, 5})).rhat > 1.2);

    auto pair = normal_chains(2, 1000, 7, {0, 0});
    pair.push_back(pair[0]);
    pair.push_back(pair[1]);
    CHECK(std::fabs(*diagnose(pair).rhat - 1.0) < 0.01);

    const std::vector<std::vector<double>> constant(4, std::vector<double>(100, 2.5));
    const auto c = diagnose(constant);
    CHECK_FALSE(c.defined());
    CHECK_FALSE(c.ess_bulk.has_value());

    CHECK_THROWS_AS(diagnose({{1.0, 2.0}}), ContractError);
}

TEST_CASE("simulated annealing") {
    const FunctionTarget bowl(2, [](const Vector& x) { return -((x[0] - 1.5) * (x[0] - 1.5) + 4.0 * (x[1] + 0.5) * (x[1] + 0.5)); });
    AnnealingSchedule s;
    s.seed = 3;
    const auto r = simulated_annealing(bowl, Vector::Zero(2), s);
    CHECK(std::fabs(r.best[0] - 1.5) < 1e-3);
    CHECK(std::fabs(r.best[1] + 0.5) < 1e-3);
    const auto again = simulated_annealing(bowl, Vector::Zero(2), s);
    CHECK(again.best == r.best);
    CHECK(again.trace == r.trace);

    AnnealingSchedule greedy;
    greedy.initial_temperature = 0.0;
    greedy.final_temperature = 0.0;
    greedy.steps = 2000;
    const auto g = simulated_annealing(bowl, Vector::Zero(2), greedy);
    for (std::size_t k = 1; k < g.trace.size(); ++k) CHECK(g.trace[k] >= g.trace[k - 1]);

    // Short cold runs on two well-separated modes land where they start.
    const FunctionTarget twin(1, [](const Vector& x) {
        return std::log(std::exp(-0.5 * (x[0] - 4) * (x[0] - 4)) + std::exp(-0.5 * (x[0] + 4) * (x[0] + 4)));
    });
    AnnealingSchedule cold;
    cold.initial_temperature = 0.05;
    cold.final_temperature = 1e-6;
    cold.steps = 5000;
    cold.proposal_scale = 0.3;
    Vector left(1), right(1);
    left << -3.0;
    right << 3.0;
    CHECK(simulated_annealing(twin, left, cold).best[0] < 0.0);
    CHECK(simulated_annealing(twin, right, cold).best[0] > 0.0);

    AnnealingSchedule warm_up = s;
    warm_up.final_temperature = 2.0;
    CHECK_THROWS_AS(simulated_annealing(bowl, Vector::Zero(2), warm_up), ParameterError);
}

TEST_CASE("loess against a direct weighted least-squares fit") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> z(0.0, 0.05);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 20 + trial * 7;
        const double span = u(rng);
        std::vector<double> x, y;
        for (int t = 1; t <= n; ++t) {
            x.push_back(t);
            y.push_back(0.3 + 0.2 * std::sin(t / 9.0) + z(rng));
        }
        const auto fit = loess_smooth(x, y, span);
        const auto ser = serial::loess_smooth(x, y, span);
        for (int i = 0; i < n; ++i) {
            CHECK(std::fabs(fit[static_cast<std::size_t>(i)] - oracle::wls_local_linear(x, y, x[static_cast<std::size_t>(i)], span)) < 1e-8);
            CHECK(fit[static_cast<std::size_t>(i)] == ser[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("loess reproduces a straight line") {
    std::vector<double> x, y;
    for (int t = 1; t <= 60; ++t) {
        x.push_back(t);
        y.push_back(2.0 - 0.03 * t);
    }
    const auto fit = loess_smooth(x, y, 0.3);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(fit[i] == doctest::Approx(y[i]).epsilon(1e-12));
    CHECK_THROWS_AS(loess_smooth(x, std::vector<double>(3, 0.0)), ParameterError);
}

TEST_CASE("observed proportion") {
    const int days = 40, draws = 30;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(50.0, 500.0);
    Matrix total(draws, days);
    for (int s = 0; s < draws; ++s)
        for (int t = 0; t < days; ++t) total(s, t) = u(rng);
    std::vector<double> cases(days);
    for (int t = 0; t < days; ++t) cases[static_cast<std::size_t>(t)] = total(0, t);

    Matrix same = total.row(0).replicate(draws, 1);
    const auto exact = observed_proportion(cases, same);
    for (double m : exact.median) CHECK(m == 1.0);
    for (double v : exact.smoothed) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(exact.excluded_total == 0);

    total(3, 5) = 0.0;
    total(4, 5) = 0.0;
    total(7, 9) = 0.0;
    const auto r = observed_proportion(cases, total);
    CHECK(r.excluded_per_day[5] == 2);
    CHECK(r.excluded_per_day[9] == 1);
    CHECK(r.excluded_total == 3);
    CHECK(std::isnan(r.ratio(3, 5)));
    const auto s = serial::observed_proportion(cases, total);
    CHECK(s.median == r.median);
    CHECK(s.smoothed == r.smoothed);

    std::vector<double> x, y;
    for (int t = 0; t < days; ++t) {
        x.push_back(t + 1);
        y.push_back(r.median[static_cast<std::size_t>(t)]);
    }
    for (int t = 0; t < days; ++t)
        CHECK(std::fabs(r.smoothed[static_cast<std::size_t>(t)] - oracle::wls_local_linear(x, y, t + 1, 0.3)) < 1e-8);
}

TEST_CASE("L-BFGS ascent") {
    // Ill-conditioned quadratic with its maximum at (1, -2, 3).
    const Vector centre = (Vector(3) << 1.0, -2.0, 3.0).finished();
    const Vector scale = (Vector(3) << 1.0, 100.0, 0.01).finished();
    const FunctionTarget bowl(3, [&](const Vector& x) { return -0.5 * (x - centre).cwiseProduct(scale).squaredNorm(); });
    const GradientFn exact = [&](const Vector& x) -> Vector { return -(x - centre).cwiseProduct(scale.cwiseAbs2()); };
    const auto r = maximize(bowl, exact, Vector::Zero(3));
    CHECK(r.converged);
    CHECK((r.x - centre).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(r.log_density == doctest::Approx(0.0).epsilon(1e-8));

    // A wall at x = 0.5 where the density is undefined beyond it; the maximum sits on the feasible side.
    const FunctionTarget walled(1, [](const Vector& x) {
        return x[0] < 0.5 ? -0.5 * (x[0] - 0.4) * (x[0] - 0.4) : -std::numeric_limits<double>::infinity();
    });
    const auto w = maximize(walled, finite_difference(walled), Vector::Constant(1, -3.0));
    CHECK(std::isfinite(w.log_density));
    CHECK(w.x[0] == doctest::Approx(0.4).epsilon(1e-4));
    CHECK_THROWS_AS(maximize(walled, finite_difference(walled), Vector::Constant(1, 1.0)), ParameterError);
}
