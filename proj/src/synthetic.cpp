#include "epi/synthetic.hpp"

#include <cmath>
#include <random>

#include "epi/errors.hpp"
#include "epi/rng.hpp"

namespace epi {

double draw_deaths(double theta, const ParamVector& params, Likelihood likelihood, std::mt19937_64& rng) {
    if (!(theta > 0.0)) return 0.0;
    double rate = theta;
    switch (likelihood) {
        case Likelihood::negbin:
            if (std::isfinite(params.psi)) rate = std::gamma_distribution<double>(params.psi, theta / params.psi)(rng);
            break;
        case Likelihood::poisson_exp:
            rate = std::exponential_distribution<double>(1.0 / theta)(rng);
            break;
        case Likelihood::poisson_lognormal: {
            const double s2 = std::log1p(params.sigma * params.sigma / (theta * theta));
            rate = std::lognormal_distribution<double>(std::log(theta) - 0.5 * s2, std::sqrt(s2))(rng);
            break;
        }
    }
    if (!(rate > 0.0)) return 0.0;
    return static_cast<double>(std::poisson_distribution<long long>(rate)(rng));
}

SyntheticData generate_synthetic(const ModelConfig& config, const ParamVector& params, const std::vector<double>& rho,
                                 std::uint64_t seed, const SyntheticOptions& options) {
    if (!(options.reporting >= 0.0 && options.reporting <= 1.0))
        throw ParameterError("reporting probability must lie in [0, 1]");
    if (options.age_shares) {
        double total = 0.0;
        for (double s : *options.age_shares) {
            if (!(s >= 0.0)) throw ParameterError("age shares must be non-negative");
            total += s;
        }
        if (std::fabs(total - 1.0) > 1e-9) throw ParameterError("age shares must sum to 1");
    }
    config.validate();
    if (params.psi <= 0.0 || std::isnan(params.psi)) throw ParameterError("psi must be positive");

    SyntheticData out;
    out.truth.params = params;
    out.truth.seed = seed;
    out.truth.reporting = options.reporting;
    out.truth.paths = simulate_paths(params, config, rho);
    if (!out.truth.paths.feasible)
        throw GenerationError("true parameters give an infeasible path: " + out.truth.paths.reason);

    const auto n = static_cast<std::size_t>(config.n);
    Dataset& d = out.data;
    for (std::size_t t = 0; t < n; ++t) d.dates.push_back(options.start + std::chrono::days{static_cast<long>(t)});

    auto death_rng = make_stream(seed, 0);
    for (std::size_t t = 0; t < n; ++t)
        d.deaths.push_back(draw_deaths(out.truth.paths.theta[t], params, config.likelihood, death_rng));

    auto case_rng = make_stream(seed, 1);
    for (std::size_t t = 0; t < n; ++t) {
        const auto infections = static_cast<long long>(std::llround(std::max(0.0, out.truth.paths.C[t])));
        const long long recorded =
            options.reporting == 1.0 ? infections
                                     : std::binomial_distribution<long long>(infections, options.reporting)(case_rng);
        d.cases.push_back(static_cast<double>(recorded));
        if (options.age_shares) {
            std::array<double, 4> split{};
            long long remaining = recorded;
            double mass = 1.0;
            for (std::size_t k = 0; k < 3; ++k) {
                const double share = (*options.age_shares)[k];
                const double p = mass > 0.0 ? std::min(1.0, share / mass) : 0.0;
                const long long x = std::binomial_distribution<long long>(remaining, p)(case_rng);
                split[k] = static_cast<double>(x);
                remaining -= x;
                mass -= share;
            }
            split[3] = static_cast<double>(remaining);
            d.cases_by_age.push_back(split);
        }
    }
    if (!rho.empty()) d.vaccinations = rho;
    d.validate();
    return out;
}

}  // namespace epi
