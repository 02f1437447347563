#pragma once

#include <limits>
#include <string>
#include <vector>

#include "epi/hmc.hpp"

namespace epi {

struct ModelScore {
    std::string model;
    int k = 0;               // free parameters
    int n = 0;               // observations
    double max_loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double mean_deviance = 0.0;
    double deviance_at_mean = 0.0;
    double p_dic = 0.0;      // mean deviance minus deviance at the mean
    double dic = 0.0;
    double p_dic2 = 0.0;     // half the variance of the deviance
    double dic2 = 0.0;
    double lppd = 0.0;
    double p_waic = 0.0;
    double waic = 0.0;
    double log_ml = std::numeric_limits<double>::quiet_NaN();
    double log_ml_error = std::numeric_limits<double>::quiet_NaN();
    double wall_days = 0.0;
};

// Core computation from a draws x observations log-likelihood matrix and the
// summed log-likelihood at the posterior mean.
ModelScore information_criteria(const Matrix& loglik, double loglik_at_mean, int k);

// Uses the posterior mean of the unconstrained draws as the plug-in point. With
// `refine_max` the best draw seeds a short annealing search on the log-likelihood.
ModelScore information_criteria(const ChainDraws& draws, const Target& target, int k, bool refine_max = false,
                                std::uint64_t seed = 1);

// lppd and p_waic; OpenMP over observations.
std::pair<double, double> waic_terms(const Matrix& loglik);

namespace serial {
std::pair<double, double> waic_terms(const Matrix& loglik);
ModelScore information_criteria(const Matrix& loglik, double loglik_at_mean, int k);
}  // namespace serial

}  // namespace epi
