#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epi/hmc.hpp"

namespace epi {

struct BridgeResult {
    double log_ml = 0.0;
    double error = 0.0;       // approximate standard error of log_ml
    int iterations = 0;
    bool converged = false;
    double effective_draws = 0.0;  // ESS of the bridge-half weights
    std::string warning;
};

struct BridgeOptions {
    // Proposal draws; zero means as many as the posterior half.
    int proposal_draws = 0;
    double tolerance = 1e-10;
    int max_iterations = 1000;
    std::uint64_t seed = 1;
};

// Iterative optimal-bridge estimate of the log marginal likelihood. The first half
// of each chain fits a Gaussian proposal in unconstrained space; the second half
// enters the bridge identity. The error combines the proposal-side variance with
// the autocorrelation-inflated posterior-side variance.
BridgeResult bridge_log_ml(const std::vector<ChainDraws>& chains, const Target& target, const BridgeOptions& options = {});

struct LogBayesFactor {
    double value = 0.0;
    double error = 0.0;
};

LogBayesFactor bayes_factor(double log_ml_a, double error_a, double log_ml_b, double error_b);
LogBayesFactor bayes_factor(const BridgeResult& a, const BridgeResult& b);

}  // namespace epi
