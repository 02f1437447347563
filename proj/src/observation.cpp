#include "epi/observation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include "epi/errors.hpp"

namespace epi {

namespace {

constexpr int kFactorialTable = 8192;

double log_factorial(double d) {
    static const std::vector<double> table = [] {
        std::vector<double> t(kFactorialTable);
        for (int k = 0; k < kFactorialTable; ++k) t[static_cast<std::size_t>(k)] = boost::math::lgamma(k + 1.0);
        return t;
    }();
    return d < kFactorialTable ? table[static_cast<std::size_t>(d)] : boost::math::lgamma(d + 1.0);
}

// log Gamma(d + psi) - log Gamma(psi). At large psi the difference cancels badly, so
// small counts are summed directly there.
double log_rising(double psi, double d) {
    if (psi > 1e5 && d <= 256.0) {
        double acc = 0.0;
        for (int j = 0; j < static_cast<int>(d); ++j) acc += std::log(psi + j);
        return acc;
    }
    return boost::math::lgamma(d + psi) - boost::math::lgamma(psi);
}

void check_count(double d) {
    if (!std::isfinite(d) || d < 0.0 || d != std::floor(d)) throw ParameterError("count must be a non-negative integer");
}

}  // namespace

double negbin_logpmf(double d, double theta, double psi) {
    check_count(d);
    if (!std::isfinite(theta) || !std::isfinite(psi) || !(theta > 0.0) || !(psi > 0.0))
        throw ParameterError("negative binomial needs positive finite mean and dispersion");
    // psi * log(psi / (psi + theta)) + d * log(theta / (psi + theta))
    return log_rising(psi, d) - log_factorial(d) - psi * std::log1p(theta / psi) + d * (std::log(theta) - std::log(psi + theta));
}

double poisson_logpmf(double d, double mu) {
    check_count(d);
    if (!std::isfinite(mu) || mu < 0.0) throw ParameterError("Poisson mean must be finite and non-negative");
    if (mu == 0.0) return d == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return d * std::log(mu) - mu - log_factorial(d);
}

double mixture_loglik(double d, double mu, MixtureVariant variant, double sigma) {
    if (variant == MixtureVariant::poisson_exp) return negbin_logpmf(d, mu, 1.0);

    check_count(d);
    if (!std::isfinite(mu) || !(mu > 0.0)) throw ParameterError("mixture mean must be positive");
    if (!std::isfinite(sigma) || !(sigma > 0.0)) throw ParameterError("LogNormal mixing scale must be positive");
    const double s2 = std::log1p((sigma * sigma) / (mu * mu));
    const double m = std::log(mu) - 0.5 * s2;  // log(mu^2 / sqrt(mu^2 + sigma^2))
    const double s = std::sqrt(s2);

    const auto& rule = gauss_hermite_40();
    const double lf = log_factorial(d);
    std::vector<double> terms(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double log_rate = m + std::numbers::sqrt2 * s * rule.nodes[i];
        terms[i] = std::log(rule.weights[i]) + d * log_rate - std::exp(log_rate) - lf;
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - top);
    const double out = top + std::log(acc) - 0.5 * std::log(std::numbers::pi);
    if (!std::isfinite(out)) throw NumericalError("Poisson-LogNormal quadrature is not finite");
    return out;
}

GaussHermiteRule gauss_hermite(int order) {
    if (order < 1) throw ParameterError("Gauss-Hermite order must be positive");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double off = std::sqrt(k / 2.0);
        jacobi(k - 1, k) = off;
        jacobi(k, k - 1) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    GaussHermiteRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        rule.weights[static_cast<std::size_t>(i)] = std::sqrt(std::numbers::pi) * v0 * v0;
    }
    return rule;
}

const GaussHermiteRule& gauss_hermite_40() {
    static const GaussHermiteRule rule = gauss_hermite(40);
    return rule;
}

}  // namespace epi
