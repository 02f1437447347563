#pragma once

#include <random>
#include <string>
#include <vector>

#include "epi/gradient.hpp"
#include "epi/model.hpp"
#include "epi/priors.hpp"
#include "epi/target.hpp"

namespace epi {

struct PosteriorValue {
    double log_posterior = 0.0;
    double log_prior = 0.0;
    std::vector<double> loglik;  // days 2..n
    bool feasible = true;
};

// Log posterior of one model variant given daily deaths. Parameters live on an
// unconstrained scale: log for rates, dispersion, initial cases and sigma,
// logit for IFRs.
class EpidemicPosterior : public Target {
public:
    EpidemicPosterior(ModelConfig config, PriorSpec priors, std::vector<double> deaths, std::vector<double> rho = {});

    int dim() const override;
    std::vector<std::string> names() const override;
    double log_density(const Vector& x) const override;
    Vector constrain(const Vector& x) const override;
    double log_prior(const Vector& x) const override;
    int observations() const override { return config_.n - 1; }
    Vector pointwise_loglik(const Vector& x) const override;

    PosteriorValue evaluate(const Vector& x) const;

    // Reverse-mode gradient of log_density through the recursions and the observation
    // model. Throws GradientError where the density is not finite.
    Vector gradient(const Vector& x) const;
    GradientFn gradient_fn() const;

    ParamVector unpack(const Vector& x) const;
    Vector pack(const ParamVector& params) const;

    // Prior medians (IFR: elicited means) on the unconstrained scale.
    Vector prior_center() const;
    // 32 candidates (prior centre plus N(0, 0.1^2) jitter, alternating with log rates
    // drawn from their prior); L-BFGS ascent from the best four, keeping the highest.
    // Keeps drawing until four candidates are feasible or max_tries is reached.
    Vector initial_point(std::mt19937_64& rng) const override { return initial_point(rng, 200); }
    Vector initial_point(std::mt19937_64& rng, int max_tries) const;

    // Free sampled scalars; used as k in AIC/BIC.
    int parameter_count() const { return dim(); }

    const ModelConfig& config() const noexcept { return config_; }
    const PriorSpec& priors() const noexcept { return priors_; }
    const std::vector<double>& deaths() const noexcept { return deaths_; }
    const std::vector<double>& vaccinations() const noexcept { return rho_; }

private:
    bool samples_ifr() const noexcept { return !priors_.ifr_point_mass(); }
    bool has_psi() const noexcept { return config_.likelihood == Likelihood::negbin; }
    bool has_sigma() const noexcept { return config_.likelihood == Likelihood::poisson_lognormal; }

    ModelConfig config_;
    PriorSpec priors_;
    std::vector<double> deaths_;
    std::vector<double> rho_;
};

// Observation log-likelihood of one day's deaths given its expected value.
double death_loglik(double d, double theta, const ParamVector& params, Likelihood likelihood);

struct LoglikDerivatives {
    double value = 0.0;
    double d_theta = 0.0;
    double d_psi = 0.0;    // negbin only
    double d_sigma = 0.0;  // poisson_lognormal only
};

LoglikDerivatives death_loglik_derivatives(double d, double theta, const ParamVector& params, Likelihood likelihood);

}  // namespace epi
