#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epi/delay.hpp"

namespace epi {

enum class Likelihood { negbin, poisson_exp, poisson_lognormal };

std::string to_string(Likelihood l);
Likelihood likelihood_from_string(const std::string& s);

struct ModelFlags {
    bool exposed = true;
    bool vaccination = false;
    bool demography = false;
    bool seirs = false;
};

// Parses names such as "sir", "seir.vacc", "seir.vacc.dem.seirs".
ModelFlags model_flags_from_string(const std::string& name);
std::string to_string(const ModelFlags& flags);

// Structural description of one model variant over a series of n days.
// Days are 1-based throughout.
struct ModelConfig {
    int n = 0;
    double N = 0.0;
    int tau = 6;
    int h = 2;           // exposed period; ignored when flags.exposed is false
    int t_star = 84;     // waning delay for SEIRS
    double a1 = 0.4;
    double a2 = 0.1;
    double A = 0.0;      // births per day
    std::vector<int> changepoints;  // u_0 = 1 < u_1 < ... < u_J = n - h - 1
    std::vector<int> ifr_breaks;    // l_1 < ... < l_{B+1}
    ModelFlags flags;
    Likelihood likelihood = Likelihood::negbin;
    DelayPMF death_delay;
    DelayPMF recovery_delay;  // required when flags.seirs

    int exposed_days() const noexcept { return flags.exposed ? h : 0; }
    int segments() const noexcept { return static_cast<int>(changepoints.size()) - 1; }
    int ifr_segments() const noexcept { return static_cast<int>(ifr_breaks.size()) - 1; }
    // Last day of the S/I/R update range, n - h - 2.
    int update_end() const noexcept { return n - exposed_days() - 2; }

    // Throws ParameterError when an invariant fails.
    void validate() const;
};

// Evenly spaced change-points with u_0 = 1 and u_J = n - h - 1.
std::vector<int> even_changepoints(int n, int h, int segments);

struct ParamVector {
    std::vector<double> lambdas;
    std::vector<double> ifrs;
    double psi = 1.0;
    double c_init = 1.0;
    double sigma = 1.0;
};

struct LatentPaths {
    std::vector<double> C, S, I, Rs, theta, Rt;  // index t - 1 for day t
    bool feasible = true;
    std::string reason;  // first violated constraint when infeasible

    double at(const std::vector<double>& v, int day) const { return v[static_cast<std::size_t>(day - 1)]; }
};

// Infection rate on day t: lambdas[j] for t in [u_j, u_{j+1} - 1].
double lambda_at(int t, const std::vector<double>& lambdas, const std::vector<int>& changepoints);

// IFR on day t; piecewise constant over the break grid, clamped to the first/last segment outside it.
double ifr_at(int t, const std::vector<double>& ifrs, const std::vector<int>& ifr_breaks);

double births_per_day(double youngest_group_size, double group_width_years);

// rho[t - 1] holds first doses on day t.
double vaccination_term(const std::vector<double>& rho, int t, double a1, double a2, int n, int h);

// Survivors of infections before day t whose recovery delay ends on day t.
double seirs_reentry(const std::vector<double>& C, const std::vector<double>& ifr_path, const DelayPMF& recovery,
                     int t);

LatentPaths simulate_paths(const ParamVector& params, const ModelConfig& config, const std::vector<double>& rho);

// R_t = lambda_t * tau * S_t / N; the last segment's rate is carried past u_J - 1.
std::vector<double> reproduction_series(const LatentPaths& paths, const ParamVector& params,
                                        const ModelConfig& config);

}  // namespace epi
