#include "epi/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epi/errors.hpp"
#include "epi/observation.hpp"
#include "epi/optimize.hpp"

namespace epi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double inv_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log p and log(1 - p) for p = inv_logit(x), without cancellation.
double log_inv_logit(double x) { return -std::log1p(std::exp(-x)); }
double log1m_inv_logit(double x) { return -std::log1p(std::exp(x)); }

}  // namespace

double death_loglik(double d, double theta, const ParamVector& params, Likelihood likelihood) {
    if (!(theta > 0.0)) return d == 0.0 ? 0.0 : kNegInf;
    switch (likelihood) {
        case Likelihood::negbin: return negbin_logpmf(d, theta, params.psi);
        case Likelihood::poisson_exp: return mixture_loglik(d, theta, MixtureVariant::poisson_exp);
        case Likelihood::poisson_lognormal:
            return mixture_loglik(d, theta, MixtureVariant::poisson_lognormal, params.sigma);
    }
    return kNegInf;
}

EpidemicPosterior::EpidemicPosterior(ModelConfig config, PriorSpec priors, std::vector<double> deaths,
                                     std::vector<double> rho)
    : config_(std::move(config)), priors_(std::move(priors)), deaths_(std::move(deaths)), rho_(std::move(rho)) {
    config_.validate();
    priors_.validate(config_.ifr_segments());
    if (static_cast<int>(deaths_.size()) != config_.n)
        throw ParameterError("death series length " + std::to_string(deaths_.size()) + " does not match n = " +
                             std::to_string(config_.n));
    for (double d : deaths_)
        if (!(d >= 0.0) || d != std::floor(d)) throw ParameterError("deaths must be non-negative integers");
    if (rho_.empty()) rho_.assign(static_cast<std::size_t>(config_.n), 0.0);
}

int EpidemicPosterior::dim() const {
    return config_.segments() + (samples_ifr() ? config_.ifr_segments() : 0) + (has_psi() ? 1 : 0) + 1 +
           (has_sigma() ? 1 : 0);
}

std::vector<std::string> EpidemicPosterior::names() const {
    std::vector<std::string> out;
    for (int j = 1; j <= config_.segments(); ++j) out.push_back("lambda_" + std::to_string(j));
    if (samples_ifr())
        for (int b = 1; b <= config_.ifr_segments(); ++b) out.push_back("ifr_" + std::to_string(b));
    if (has_psi()) out.push_back("psi");
    out.push_back("c_init");
    if (has_sigma()) out.push_back("sigma");
    return out;
}

ParamVector EpidemicPosterior::unpack(const Vector& x) const {
    if (x.size() != dim()) throw ParameterError("unconstrained vector has the wrong dimension");
    ParamVector p;
    Eigen::Index i = 0;
    for (int j = 0; j < config_.segments(); ++j) p.lambdas.push_back(std::exp(x[i++]));
    if (samples_ifr()) {
        for (int b = 0; b < config_.ifr_segments(); ++b) p.ifrs.push_back(inv_logit(x[i++]));
    } else {
        p.ifrs = priors_.ifr_means;
    }
    p.psi = has_psi() ? std::exp(x[i++]) : 1.0;
    p.c_init = std::exp(x[i++]);
    p.sigma = has_sigma() ? std::exp(x[i++]) : 1.0;
    return p;
}

Vector EpidemicPosterior::pack(const ParamVector& p) const {
    Vector x(dim());
    Eigen::Index i = 0;
    for (double l : p.lambdas) x[i++] = std::log(l);
    if (samples_ifr())
        for (double q : p.ifrs) x[i++] = std::log(q) - std::log1p(-q);
    if (has_psi()) x[i++] = std::log(p.psi);
    x[i++] = std::log(p.c_init);
    if (has_sigma()) x[i++] = std::log(p.sigma);
    return x;
}

Vector EpidemicPosterior::constrain(const Vector& x) const {
    const ParamVector p = unpack(x);
    Vector out(dim());
    Eigen::Index i = 0;
    for (double l : p.lambdas) out[i++] = l;
    if (samples_ifr())
        for (double q : p.ifrs) out[i++] = q;
    if (has_psi()) out[i++] = p.psi;
    out[i++] = p.c_init;
    if (has_sigma()) out[i++] = p.sigma;
    return out;
}

double EpidemicPosterior::log_prior(const Vector& x) const {
    if (x.size() != dim()) throw ParameterError("unconstrained vector has the wrong dimension");
    double lp = 0.0;
    Eigen::Index i = 0;
    // Log-scaled parameters: density at e^x times the Jacobian e^x.
    for (int j = 0; j < config_.segments(); ++j, ++i) lp += priors_.lambda.log_pdf(std::exp(x[i])) + x[i];
    if (samples_ifr()) {
        for (int b = 0; b < config_.ifr_segments(); ++b, ++i) {
            const NormalPrior prior{priors_.ifr_means[static_cast<std::size_t>(b)], priors_.ifr_sd};
            lp += prior.log_pdf(inv_logit(x[i])) + log_inv_logit(x[i]) + log1m_inv_logit(x[i]);
        }
    }
    if (has_psi()) {
        lp += priors_.psi.log_pdf(std::exp(x[i])) + x[i];
        ++i;
    }
    lp += priors_.c_init.log_pdf(std::exp(x[i])) + x[i];
    ++i;
    if (has_sigma()) lp += priors_.sigma.log_pdf(std::exp(x[i])) + x[i];
    return std::isnan(lp) ? kNegInf : lp;
}

PosteriorValue EpidemicPosterior::evaluate(const Vector& x) const {
    PosteriorValue out;
    const auto n_obs = static_cast<std::size_t>(config_.n - 1);
    out.log_prior = log_prior(x);
    auto infeasible = [&] {
        out.feasible = false;
        out.log_posterior = kNegInf;
        out.loglik.assign(n_obs, kNegInf);
        return out;
    };
    if (!std::isfinite(out.log_prior)) return infeasible();

    const ParamVector p = unpack(x);
    for (double l : p.lambdas)
        if (!std::isfinite(l)) return infeasible();
    if (!std::isfinite(p.psi) || !(p.psi > 0.0) || !std::isfinite(p.c_init) || !std::isfinite(p.sigma) ||
        !(p.sigma > 0.0))
        return infeasible();

    const LatentPaths paths = simulate_paths(p, config_, rho_);
    if (!paths.feasible) return infeasible();

    out.loglik.resize(n_obs);
    double total = 0.0;
    for (std::size_t i = 0; i < n_obs; ++i) {
        try {
            out.loglik[i] = death_loglik(deaths_[i + 1], paths.theta[i + 1], p, config_.likelihood);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " on day " + std::to_string(i + 2));
        }
        total += out.loglik[i];
    }
    out.log_posterior = out.log_prior + total;
    if (std::isnan(out.log_posterior))
        throw NumericalError("log posterior is NaN at a finite parameter point");
    if (out.log_posterior == kNegInf) out.feasible = false;
    return out;
}

double EpidemicPosterior::log_density(const Vector& x) const { return evaluate(x).log_posterior; }

Vector EpidemicPosterior::pointwise_loglik(const Vector& x) const {
    const auto v = evaluate(x);
    return Eigen::Map<const Vector>(v.loglik.data(), static_cast<Eigen::Index>(v.loglik.size()));
}

Vector EpidemicPosterior::prior_center() const {
    ParamVector p;
    p.lambdas.assign(static_cast<std::size_t>(config_.segments()), priors_.lambda.median());
    p.ifrs = priors_.ifr_means;
    p.psi = priors_.psi.median();
    p.c_init = priors_.c_init.median();
    p.sigma = priors_.sigma.median();
    return pack(p);
}

Vector EpidemicPosterior::initial_point(std::mt19937_64& rng, int max_tries) const {
    const Vector center = prior_center();
    std::normal_distribution<double> jitter(0.0, 0.1);
    std::normal_distribution<double> rate_prior(priors_.lambda.mu, priors_.lambda.sigma);
    // Candidates alternate between the jittered prior centre and log rates drawn from
    // their prior (capped at the median). A candidate can sit against a feasibility wall
    // that stops the ascent, so the best few are each refined.
    constexpr int kCandidates = 32;
    constexpr std::size_t kAscents = 4;
    std::vector<std::pair<double, Vector>> feasible;
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        if (attempt >= kCandidates && feasible.size() >= kAscents) break;
        Vector x = center;
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += jitter(rng);
        if (attempt % 2 == 1)
            for (int j = 0; j < config_.segments(); ++j) x[j] = std::min(rate_prior(rng), 0.0);
        const double lp = log_density(x);
        if (std::isfinite(lp)) feasible.emplace_back(lp, std::move(x));
    }
    if (feasible.empty())
        throw SamplerError("no feasible initial point near the prior centre after " + std::to_string(max_tries) +
                           " draws");
    std::stable_sort(feasible.begin(), feasible.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    AscentResult best;
    best.log_density = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < std::min(kAscents, feasible.size()); ++k) {
        auto r = maximize(*this, gradient_fn(), feasible[k].second);
        if (r.log_density > best.log_density) best = std::move(r);
    }
    return best.x;
}

}  // namespace epi
