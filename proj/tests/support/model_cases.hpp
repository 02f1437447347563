#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "epi/model.hpp"
#include "support/recursion_oracle.hpp"

namespace oracle {

inline epi::ModelConfig small_config(int n, int tau, int h, double N, epi::ModelFlags flags = {false, false, false, false}) {
    epi::ModelConfig c;
    c.n = n;
    c.N = N;
    c.tau = tau;
    c.h = h;
    c.flags = flags;
    c.flags.exposed = h > 0;
    c.changepoints = {1, n - c.exposed_days() - 1};
    c.ifr_breaks = {1, n + 1};
    c.death_delay = epi::discretize_delay(epi::DelaySpec::gamma(2.0, 0.4), n);
    return c;
}

inline epi::ParamVector flat_params(double lambda, double c_init, double ifr = 0.01) {
    epi::ParamVector p;
    p.lambdas = {lambda};
    p.ifrs = {ifr};
    p.c_init = c_init;
    return p;
}

inline Instance to_instance(const epi::ModelConfig& c, const epi::ParamVector& p, const std::vector<double>& rho) {
    Instance x;
    x.n = c.n;
    x.N = c.N;
    x.tau = c.tau;
    x.h = c.exposed_days();
    x.t_star = c.t_star;
    x.a1 = c.a1;
    x.a2 = c.a2;
    x.A = c.A;
    x.vacc = c.flags.vaccination;
    x.dem = c.flags.demography;
    x.seirs = c.flags.seirs;
    x.u = c.changepoints;
    x.lam = p.lambdas;
    x.l = c.ifr_breaks;
    x.p = p.ifrs;
    x.c_init = p.c_init;
    x.rho.assign(static_cast<std::size_t>(c.n) + 1, 0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) x.rho[i + 1] = rho[i];
    x.death.assign(1, 0.0);
    for (double m : c.death_delay.masses()) x.death.push_back(m);
    x.recov.assign(1, 0.0);
    for (double m : c.recovery_delay.masses()) x.recov.push_back(m);
    return x;
}

// Relative error with an absolute floor of one.
inline double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

struct RandomCase {
    epi::ModelConfig config;
    epi::ParamVector params;
    std::vector<double> rho;
};

// Bits of `combo`: vaccination, demography, SEIRS, exposed compartment.
inline RandomCase random_case(std::mt19937_64& rng, int combo) {
    std::uniform_int_distribution<int> n_dist(14, 30), tau_dist(1, 5), h_dist(1, 3), j_dist(1, 3);
    std::uniform_real_distribution<double> lam(0.05, 0.6), U(0.0, 1.0);
    epi::ModelFlags flags{};
    flags.vaccination = combo & 1;
    flags.demography = combo & 2;
    flags.seirs = combo & 4;
    const int n = n_dist(rng);
    const int h = (combo & 8) ? h_dist(rng) : 0;
    RandomCase rc;
    auto& c = rc.config;
    c = small_config(n, tau_dist(rng), h, 1e4 + 1e5 * U(rng), flags);
    c.A = 30.0 * U(rng);
    c.t_star = 3 + static_cast<int>(8 * U(rng));
    c.recovery_delay = epi::discretize_delay(epi::DelaySpec::gamma(2.0, 0.5), n, epi::DelayKind::infection_to_recovery);
    const int J = j_dist(rng);
    c.changepoints = epi::even_changepoints(n, c.exposed_days(), J);
    c.ifr_breaks = {1, n / 2, n + 1};
    for (int j = 0; j < J; ++j) rc.params.lambdas.push_back(lam(rng));
    rc.params.ifrs = {0.005 + 0.02 * U(rng), 0.005 + 0.02 * U(rng)};
    rc.params.c_init = 1.0 + 20.0 * U(rng);
    rc.rho.resize(static_cast<std::size_t>(n));
    for (auto& r : rc.rho) r = 50.0 * U(rng);
    return rc;
}

// Largest relative error over C, S, I, R and theta; negative when feasibility differs.
inline double max_path_error(const epi::LatentPaths& got, const Paths& want, int n) {
    if (got.feasible != want.ok) return -1.0;
    double worst = 0.0;
    if (!want.ok) return worst;
    for (int t = 1; t <= n; ++t) {
        worst = std::max({worst, rel(got.at(got.C, t), want.C[t]), rel(got.at(got.S, t), want.S[t]),
                          rel(got.at(got.I, t), want.I[t]), rel(got.at(got.Rs, t), want.R[t]),
                          rel(got.at(got.theta, t), want.theta[t])});
    }
    return worst;
}

}  // namespace oracle
