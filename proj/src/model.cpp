#include "epi/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epi/errors.hpp"

namespace epi {

std::string to_string(Likelihood l) {
    switch (l) {
        case Likelihood::negbin: return "negbin";
        case Likelihood::poisson_exp: return "poisexp";
        case Likelihood::poisson_lognormal: return "poislognorm";
    }
    return "negbin";
}

Likelihood likelihood_from_string(const std::string& s) {
    if (s == "negbin") return Likelihood::negbin;
    if (s == "poisexp" || s == "poisson_exp") return Likelihood::poisson_exp;
    if (s == "poislognorm" || s == "poisson_lognormal") return Likelihood::poisson_lognormal;
    throw ParameterError("unknown likelihood '" + s + "'");
}

ModelFlags model_flags_from_string(const std::string& name) {
    std::stringstream ss(name);
    std::string part;
    std::getline(ss, part, '.');
    ModelFlags flags;
    if (part == "sir")
        flags.exposed = false;
    else if (part == "seir")
        flags.exposed = true;
    else
        throw ParameterError("model name must start with 'sir' or 'seir': '" + name + "'");
    while (std::getline(ss, part, '.')) {
        if (part == "vacc")
            flags.vaccination = true;
        else if (part == "dem")
            flags.demography = true;
        else if (part == "seirs")
            flags.seirs = true;
        else
            throw ParameterError("unknown model extension '" + part + "' in '" + name + "'");
    }
    return flags;
}

std::string to_string(const ModelFlags& flags) {
    std::string s = flags.exposed ? "seir" : "sir";
    if (flags.vaccination) s += ".vacc";
    if (flags.demography) s += ".dem";
    if (flags.seirs) s += ".seirs";
    return s;
}

void ModelConfig::validate() const {
    if (!(N > 0.0)) throw ParameterError("population N must be positive");
    if (tau < 1) throw ParameterError("infectious period tau must be at least 1");
    if (h < 0) throw ParameterError("exposed period h must be non-negative");
    if (a1 < 0.0 || a2 < 0.0 || a1 + a2 > 1.0) throw ParameterError("immunity probabilities need 0 <= a1 + a2 <= 1");
    if (A < 0.0) throw ParameterError("births per day must be non-negative");
    if (n < exposed_days() + 3) throw ParameterError("series too short for the exposed period");
    if (changepoints.size() < 2) throw ParameterError("need at least one infection-rate segment");
    if (changepoints.front() != 1) throw ParameterError("first change-point must be day 1");
    if (changepoints.back() != n - exposed_days() - 1)
        throw ParameterError("last change-point must be n - h - 1 = " + std::to_string(n - exposed_days() - 1));
    if (!std::is_sorted(changepoints.begin(), changepoints.end(), std::less_equal<>{}))
        throw ParameterError("change-points must be strictly increasing");
    if (ifr_breaks.size() < 2) throw ParameterError("need at least one IFR segment");
    if (!std::is_sorted(ifr_breaks.begin(), ifr_breaks.end(), std::less_equal<>{}))
        throw ParameterError("IFR breaks must be strictly increasing");
    if (death_delay.size() == 0) throw ParameterError("death delay distribution is missing");
    if (flags.seirs) {
        if (recovery_delay.size() == 0) throw ParameterError("SEIRS requires a recovery delay distribution");
        if (t_star < 1) throw ParameterError("waning delay t_star must be at least 1");
    }
}

std::vector<int> even_changepoints(int n, int h, int segments) {
    const int last = n - h - 1;
    if (segments < 1 || last - 1 < segments) throw ParameterError("cannot place that many change-points");
    std::vector<int> u(static_cast<std::size_t>(segments) + 1);
    for (int j = 0; j <= segments; ++j)
        u[static_cast<std::size_t>(j)] = 1 + static_cast<int>(std::lround(static_cast<double>(j) * (last - 1) / segments));
    return u;
}

double lambda_at(int t, const std::vector<double>& lambdas, const std::vector<int>& changepoints) {
    if (changepoints.size() != lambdas.size() + 1) throw ParameterError("need one rate per change-point segment");
    if (t < changepoints.front() || t >= changepoints.back())
        throw RangeError("day " + std::to_string(t) + " outside the infection-rate grid [" +
                         std::to_string(changepoints.front()) + ", " + std::to_string(changepoints.back() - 1) + "]");
    const auto it = std::upper_bound(changepoints.begin(), changepoints.end(), t);
    return lambdas[static_cast<std::size_t>(it - changepoints.begin() - 1)];
}

double ifr_at(int t, const std::vector<double>& ifrs, const std::vector<int>& ifr_breaks) {
    if (ifr_breaks.size() != ifrs.size() + 1) throw ParameterError("need one IFR per break segment");
    const auto it = std::upper_bound(ifr_breaks.begin(), ifr_breaks.end() - 1, t);
    const auto b = std::clamp<std::ptrdiff_t>(it - ifr_breaks.begin() - 1, 0, static_cast<std::ptrdiff_t>(ifrs.size()) - 1);
    return ifrs[static_cast<std::size_t>(b)];
}

double births_per_day(double youngest_group_size, double group_width_years) {
    if (youngest_group_size < 0.0 || !(group_width_years > 0.0))
        throw ParameterError("births need a non-negative group size and positive width");
    return youngest_group_size / (365.0 * group_width_years);
}

double vaccination_term(const std::vector<double>& rho, int t, double a1, double a2, int n, int h) {
    auto dose = [&](int day) {
        return (day >= 1 && static_cast<std::size_t>(day) <= rho.size()) ? rho[static_cast<std::size_t>(day - 1)] : 0.0;
    };
    const int end = n - h - 2;
    double v = 0.0;
    if (t >= 15 && t <= end) v += a1 * dose(t - 14);
    if (t >= 36 && t <= end) v += a2 * dose(t - 35);
    return v;
}

double seirs_reentry(const std::vector<double>& C, const std::vector<double>& ifr_path, const DelayPMF& recovery,
                     int t) {
    if (t < 2) return 0.0;
    double acc = 0.0;
    for (int k = 1; k <= t - 1; ++k) acc += recovery(t - k) * C[static_cast<std::size_t>(k - 1)];
    return (1.0 - ifr_path[static_cast<std::size_t>(t - 1)]) * acc;
}

LatentPaths simulate_paths(const ParamVector& params, const ModelConfig& config, const std::vector<double>& rho) {
    const int n = config.n;
    const int tau = config.tau;
    const int h = config.exposed_days();
    const int seed_end = tau + h;
    const int update_end = config.update_end();
    const double N = config.N;
    const double A = config.flags.demography ? config.A : 0.0;
    const auto sz = static_cast<std::size_t>(n);

    if (params.lambdas.size() + 1 != config.changepoints.size())
        throw ParameterError("parameter vector has the wrong number of infection rates");
    if (params.ifrs.size() + 1 != config.ifr_breaks.size())
        throw ParameterError("parameter vector has the wrong number of IFRs");
    if (config.flags.vaccination && rho.size() < sz) throw ParameterError("vaccination series shorter than n");

    LatentPaths p;
    p.C.assign(sz, 0.0);
    p.S.assign(sz, 0.0);
    p.I.assign(sz, 0.0);
    p.Rs.assign(sz, 0.0);
    p.theta.assign(sz, 0.0);
    p.Rt.assign(sz, 0.0);
    auto C = [&](int t) -> double& { return p.C[static_cast<std::size_t>(t - 1)]; };
    auto S = [&](int t) -> double& { return p.S[static_cast<std::size_t>(t - 1)]; };
    auto I = [&](int t) -> double& { return p.I[static_cast<std::size_t>(t - 1)]; };
    auto R = [&](int t) -> double& { return p.Rs[static_cast<std::size_t>(t - 1)]; };

    std::vector<double> ifr(sz);
    for (int t = 1; t <= n; ++t) ifr[static_cast<std::size_t>(t - 1)] = ifr_at(t, params.ifrs, config.ifr_breaks);

    auto fail = [&](const char* what, int t) {
        p.feasible = false;
        p.reason = std::string(what) + " on day " + std::to_string(t);
        return p;
    };

    for (int t = 1; t <= std::min(seed_end, n); ++t) C(t) = params.c_init;
    S(1) = N - params.c_init;
    I(1) = params.c_init;
    R(1) = 0.0;
    if (!(S(1) >= 0.0) || !(params.c_init >= 0.0)) return fail("initial cases exceed the population", 1);

    // Running sum of C_1..C_{t - tau} for the removed compartment.
    double removed_sum = 0.0;
    for (int t = 2; t <= n; ++t) {
        if (t >= seed_end + 1 && t <= n - 1) {
            const int s = t - 1 - h;
            C(t) = lambda_at(s, params.lambdas, config.changepoints) * S(s) * I(s) / N;
        } else if (t == n && t > seed_end) {
            C(t) = C(t - 1);
        }
        if (!(C(t) >= 0.0) || !std::isfinite(C(t))) return fail("negative or non-finite cases", t);

        if (t >= tau && t <= update_end) {
            const double v = config.flags.vaccination ? vaccination_term(rho, t, config.a1, config.a2, n, h) : 0.0;
            double s_next = S(t - 1) - C(t) - v + A * (1.0 - S(t - 1) / N);
            if (config.flags.seirs && t - config.t_star >= 2)
                s_next += seirs_reentry(p.C, ifr, config.recovery_delay, t - config.t_star);
            S(t) = s_next;

            double active = 0.0;
            for (int k = 0; k <= tau - 1 && t - k >= 1; ++k) active += C(t - k);
            I(t) = active - A * I(t - 1) / N;

            if (t - tau >= 1) removed_sum += C(t - tau);
            R(t) = removed_sum + v - A * R(t - 1) / N;
        } else {
            S(t) = S(t - 1);
            I(t) = I(t - 1);
            R(t) = R(t - 1);
        }
        if (!(S(t) >= 0.0) || !std::isfinite(S(t))) return fail("negative susceptibles", t);
        if (S(t) > N * (1.0 + 1e-12)) return fail("susceptibles above the population", t);
        if (!(I(t) >= 0.0) || !std::isfinite(I(t))) return fail("negative infectives", t);
    }

    const double* pi = config.death_delay.masses().data();
    const int span = static_cast<int>(config.death_delay.size());
    for (int t = 2; t <= n; ++t) {
        // sum over k of pi_{t-k} C_k, with t - k limited to the delay support
        double acc = 0.0;
        for (int k = std::max(1, t - span); k <= t - 1; ++k) acc += pi[t - k - 1] * p.C[static_cast<std::size_t>(k - 1)];
        p.theta[static_cast<std::size_t>(t - 1)] = ifr[static_cast<std::size_t>(t - 1)] * acc;
    }
    p.Rt = reproduction_series(p, params, config);
    return p;
}

std::vector<double> reproduction_series(const LatentPaths& paths, const ParamVector& params,
                                        const ModelConfig& config) {
    const auto& u = config.changepoints;
    std::vector<double> rt(paths.S.size());
    for (std::size_t i = 0; i < rt.size(); ++i) {
        const int t = std::min(static_cast<int>(i) + 1, u.back() - 1);
        rt[i] = lambda_at(t, params.lambdas, u) * config.tau * paths.S[i] / config.N;
    }
    return rt;
}

}  // namespace epi
