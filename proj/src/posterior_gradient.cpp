#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>

#include "epi/errors.hpp"
#include "epi/observation.hpp"
#include "epi/posterior.hpp"

namespace epi {

namespace {

// Index j with breaks[j] <= t < breaks[j + 1], clamped to the valid segments.
std::size_t segment_of(int t, const std::vector<int>& breaks) {
    const auto it = std::upper_bound(breaks.begin(), breaks.end() - 1, t);
    const auto j = std::clamp<std::ptrdiff_t>(it - breaks.begin() - 1, 0, static_cast<std::ptrdiff_t>(breaks.size()) - 2);
    return static_cast<std::size_t>(j);
}

// sum_{k < d} 1 / (psi + k), i.e. digamma(d + psi) - digamma(psi) for integer d.
double digamma_rise(double d, double psi) {
    if (d <= 256.0) {
        double acc = 0.0;
        for (int k = 0; k < static_cast<int>(d); ++k) acc += 1.0 / (psi + k);
        return acc;
    }
    return boost::math::digamma(d + psi) - boost::math::digamma(psi);
}

LoglikDerivatives negbin_derivatives(double d, double theta, double psi) {
    LoglikDerivatives g;
    g.value = negbin_logpmf(d, theta, psi);
    g.d_theta = d / theta - (d + psi) / (psi + theta);
    g.d_psi = digamma_rise(d, psi) - std::log1p(theta / psi) + (theta - d) / (psi + theta);
    return g;
}

LoglikDerivatives lognormal_derivatives(double d, double mu, double sigma) {
    LoglikDerivatives g;
    g.value = mixture_loglik(d, mu, MixtureVariant::poisson_lognormal, sigma);
    const double ratio = sigma * sigma / (mu * mu);
    const double s2 = std::log1p(ratio);
    const double m = std::log(mu) - 0.5 * s2;
    const double s = std::sqrt(s2);

    // Posterior weights of the quadrature nodes and the score in the log rate.
    const auto& rule = gauss_hermite_40();
    const std::size_t K = rule.nodes.size();
    std::vector<double> terms(K), score(K);
    for (std::size_t i = 0; i < K; ++i) {
        const double r = m + std::numbers::sqrt2 * s * rule.nodes[i];
        terms[i] = std::log(rule.weights[i]) + d * r - std::exp(r);
        score[i] = d - std::exp(r);
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double total = 0.0, dm = 0.0, ds = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        const double w = std::exp(terms[i] - top);
        total += w;
        dm += w * score[i];
        ds += w * score[i] * std::numbers::sqrt2 * rule.nodes[i];
    }
    dm /= total;
    ds /= total;

    const double ds2_dmu = -2.0 * ratio / mu / (1.0 + ratio);
    const double ds2_dsigma = 2.0 * sigma / (mu * mu) / (1.0 + ratio);
    const double inv2s = s > 0.0 ? 0.5 / s : 0.0;
    g.d_theta = dm * (1.0 / mu - 0.5 * ds2_dmu) + ds * ds2_dmu * inv2s;
    g.d_sigma = dm * (-0.5 * ds2_dsigma) + ds * ds2_dsigma * inv2s;
    return g;
}

}  // namespace

LoglikDerivatives death_loglik_derivatives(double d, double theta, const ParamVector& params, Likelihood likelihood) {
    if (!(theta > 0.0)) {
        LoglikDerivatives g;
        g.value = d == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
        return g;
    }
    switch (likelihood) {
        case Likelihood::negbin: return negbin_derivatives(d, theta, params.psi);
        case Likelihood::poisson_exp: {
            auto g = negbin_derivatives(d, theta, 1.0);
            g.d_psi = 0.0;
            return g;
        }
        case Likelihood::poisson_lognormal: return lognormal_derivatives(d, theta, params.sigma);
    }
    return {};
}

Vector EpidemicPosterior::gradient(const Vector& x) const {
    if (x.size() != dim()) throw ParameterError("unconstrained vector has the wrong dimension");
    const ParamVector p = unpack(x);
    const LatentPaths paths = simulate_paths(p, config_, rho_);
    if (!paths.feasible) throw GradientError("gradient requested on an infeasible path: " + paths.reason, -1);

    const ModelConfig& c = config_;
    const int n = c.n, tau = c.tau, h = c.exposed_days();
    const int seed_end = tau + h, update_end = c.update_end();
    const double N = c.N;
    const double A = c.flags.demography ? c.A : 0.0;
    const auto nz = static_cast<std::size_t>(n) + 1;
    auto C = [&](int t) { return paths.C[static_cast<std::size_t>(t - 1)]; };
    auto S = [&](int t) { return paths.S[static_cast<std::size_t>(t - 1)]; };
    auto I = [&](int t) { return paths.I[static_cast<std::size_t>(t - 1)]; };

    std::vector<double> ifr(nz), Cb(nz, 0.0), Sb(nz, 0.0), Ib(nz, 0.0);
    std::vector<std::size_t> ifr_seg(nz);
    for (int t = 1; t <= n; ++t) {
        ifr_seg[static_cast<std::size_t>(t)] = segment_of(t, c.ifr_breaks);
        ifr[static_cast<std::size_t>(t)] = p.ifrs[ifr_seg[static_cast<std::size_t>(t)]];
    }
    std::vector<double> lam_b(p.lambdas.size(), 0.0), ifr_b(p.ifrs.size(), 0.0);
    double c_b = 0.0, psi_b = 0.0, sigma_b = 0.0;

    // Observation model: theta_t = ifr_t * sum_k pi_{t-k} C_k.
    const double* pi = c.death_delay.masses().data();
    const int span = static_cast<int>(c.death_delay.size());
    for (int t = 2; t <= n; ++t) {
        const double theta = paths.theta[static_cast<std::size_t>(t - 1)];
        const auto g = death_loglik_derivatives(deaths_[static_cast<std::size_t>(t - 1)], theta, p, c.likelihood);
        if (!std::isfinite(g.value) || !std::isfinite(g.d_theta))
            throw GradientError("log-likelihood not differentiable on day " + std::to_string(t), -1);
        psi_b += g.d_psi;
        sigma_b += g.d_sigma;
        if (g.d_theta == 0.0) continue;
        double conv = 0.0;
        const double scale = g.d_theta * ifr[static_cast<std::size_t>(t)];
        for (int k = std::max(1, t - span); k <= t - 1; ++k) {
            conv += pi[t - k - 1] * C(k);
            Cb[static_cast<std::size_t>(k)] += scale * pi[t - k - 1];
        }
        ifr_b[ifr_seg[static_cast<std::size_t>(t)]] += g.d_theta * conv;
    }

    // State recursions, last day first.
    for (int t = n; t >= 2; --t) {
        const auto ut = static_cast<std::size_t>(t);
        if (t >= tau && t <= update_end) {
            const double sb = Sb[ut];
            Sb[ut - 1] += sb * (1.0 - A / N);
            Cb[ut] -= sb;
            if (c.flags.seirs && t - c.t_star >= 2) {
                const int u = t - c.t_star;
                double acc = 0.0;
                const double keep = 1.0 - ifr[static_cast<std::size_t>(u)];
                for (int k = 1; k <= u - 1; ++k) {
                    const double r = c.recovery_delay(u - k);
                    acc += r * C(k);
                    Cb[static_cast<std::size_t>(k)] += sb * keep * r;
                }
                ifr_b[ifr_seg[static_cast<std::size_t>(u)]] -= sb * acc;
            }
            const double ib = Ib[ut];
            for (int k = 0; k <= tau - 1 && t - k >= 1; ++k) Cb[static_cast<std::size_t>(t - k)] += ib;
            Ib[ut - 1] -= ib * A / N;
        } else {
            Sb[ut - 1] += Sb[ut];
            Ib[ut - 1] += Ib[ut];
        }

        const double cb = Cb[ut];
        if (t >= seed_end + 1 && t <= n - 1) {
            const int s = t - 1 - h;
            const std::size_t j = segment_of(s, c.changepoints);
            const double lam = p.lambdas[j];
            lam_b[j] += cb * S(s) * I(s) / N;
            Sb[static_cast<std::size_t>(s)] += cb * lam * I(s) / N;
            Ib[static_cast<std::size_t>(s)] += cb * lam * S(s) / N;
        } else if (t == n && t > seed_end) {
            Cb[ut - 1] += cb;
        } else {
            c_b += cb;
        }
    }
    c_b += Cb[1] - Sb[1] + Ib[1];

    // Chain rule to the unconstrained scale, plus the prior with its Jacobian.
    Vector grad(dim());
    Eigen::Index i = 0;
    for (std::size_t j = 0; j < p.lambdas.size(); ++j, ++i)
        grad[i] = lam_b[j] * p.lambdas[j] - (x[i] - priors_.lambda.mu) / (priors_.lambda.sigma * priors_.lambda.sigma);
    if (samples_ifr()) {
        for (std::size_t b = 0; b < p.ifrs.size(); ++b, ++i) {
            const double q = p.ifrs[b];
            const double m = priors_.ifr_means[b], sd = priors_.ifr_sd;
            grad[i] = (ifr_b[b] - (q - m) / (sd * sd)) * q * (1.0 - q) + 1.0 - 2.0 * q;
        }
    }
    if (has_psi()) {
        grad[i] = psi_b * p.psi + priors_.psi.shape - priors_.psi.rate * p.psi;
        ++i;
    }
    grad[i] = c_b * p.c_init + priors_.c_init.shape - priors_.c_init.rate * p.c_init;
    ++i;
    if (has_sigma())
        grad[i] = sigma_b * p.sigma - (x[i] - priors_.sigma.mu) / (priors_.sigma.sigma * priors_.sigma.sigma);
    for (Eigen::Index k = 0; k < grad.size(); ++k)
        if (!std::isfinite(grad[k])) throw GradientError("non-finite gradient in coordinate " + std::to_string(k), static_cast<int>(k));
    return grad;
}

GradientFn EpidemicPosterior::gradient_fn() const {
    return [this](const Vector& x) { return gradient(x); };
}

}  // namespace epi
