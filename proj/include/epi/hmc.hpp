#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epi/gradient.hpp"
#include "epi/target.hpp"

namespace epi {

struct SamplerConfig {
    int warmup = 1000;
    int samples = 1000;
    int thin = 1;
    double target_accept = 0.8;
    double initial_step = 0.1;
    double min_step = 1e-8;
    double max_step = 10.0;
    // Mean integration time; each trajectory uses a uniform number of steps in [1, 2T / step].
    double integration_time = 1.5;
    int max_leapfrog = 1024;
    double max_energy_error = 1000.0;
    // Metric adaptation windows (Stan-style).
    int init_buffer = 75;
    int term_buffer = 200;
    int base_window = 25;
    bool adapt_metric = true;
    std::uint64_t seed = 1;

    void validate() const;
};

struct AdaptationRecord {
    double step_size = 0.0;
    Vector inv_metric;  // diagonal
    int warmup_divergences = 0;
};

struct ChainDraws {
    std::vector<std::string> names;
    Matrix draws;        // M x P, unconstrained
    Matrix constrained;  // M x P
    Vector lp;           // M log densities
    Vector log_prior;    // M
    Matrix loglik;       // M x n_obs; zero columns when the target has no observation model
    std::uint64_t seed = 0;
    int chain = 0;
    AdaptationRecord adaptation;
    double acceptance = 0.0;  // mean acceptance statistic after warmup
    int divergences = 0;      // after warmup
    double mean_leapfrog = 0.0;
    double wall_seconds = 0.0;

    Eigen::Index size() const noexcept { return draws.rows(); }
};

// One leapfrog trajectory; exposed for integrator tests. Returns false when the
// density or gradient became non-finite along the way.
bool leapfrog(const Target& target, const GradientFn& grad, Vector& q, Vector& p, Vector& g, double step, int steps,
              const Vector& inv_metric);

// Euclidean HMC with dual-averaging step size and diagonal metric adaptation.
ChainDraws hmc_sample(const Target& target, const GradientFn& grad, const SamplerConfig& config, int chain = 0);
ChainDraws hmc_sample(const Target& target, const SamplerConfig& config, int chain = 0);

// Runs `chains` chains concurrently; chain c uses stream_seed(config.seed, c).
std::vector<ChainDraws> run_chains(const Target& target, const SamplerConfig& config, int chains);
std::vector<ChainDraws> run_chains(const Target& target, const GradientFn& grad, const SamplerConfig& config,
                                   int chains);

ChainDraws merge_chains(const std::vector<ChainDraws>& chains);

// FNV-1a over the unconstrained draw matrix and log densities.
std::uint64_t hash_draws(const ChainDraws& draws);
std::uint64_t hash_draws(const std::vector<ChainDraws>& chains);

namespace serial {
std::vector<ChainDraws> run_chains(const Target& target, const SamplerConfig& config, int chains);
std::vector<ChainDraws> run_chains(const Target& target, const GradientFn& grad, const SamplerConfig& config,
                                   int chains);
}  // namespace serial

}  // namespace epi
