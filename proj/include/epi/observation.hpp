#pragma once

#include <vector>

namespace epi {

enum class MixtureVariant { poisson_exp, poisson_lognormal };

// Negative Binomial with mean theta and variance theta + theta^2 / psi.
double negbin_logpmf(double d, double theta, double psi);

double poisson_logpmf(double d, double mu);

// Poisson with a mixing distribution on its rate: Exponential with mean mu, or
// LogNormal moment-matched to mean mu and standard deviation sigma.
double mixture_loglik(double d, double mu, MixtureVariant variant, double sigma = 0.0);

// Nodes and weights for integrals of the form  int exp(-x^2) f(x) dx.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch; the order-40 rule is built once and shared.
GaussHermiteRule gauss_hermite(int order);
const GaussHermiteRule& gauss_hermite_40();

}  // namespace epi
