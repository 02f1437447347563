#include "epi/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

#include "epi/diagnostics.hpp"
#include "epi/errors.hpp"

namespace epi {

namespace {

struct Gaussian {
    Vector mean;
    Eigen::LLT<Matrix> chol;
    double log_norm = 0.0;

    double log_pdf(const Vector& x) const {
        const Vector z = chol.matrixL().solve(x - mean);
        return log_norm - 0.5 * z.squaredNorm();
    }
};

Gaussian fit_gaussian(const Matrix& draws) {
    Gaussian g;
    g.mean = draws.colwise().mean().transpose();
    const Matrix centered = draws.rowwise() - g.mean.transpose();
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(draws.rows() - 1);
    g.chol.compute(cov);
    if (g.chol.info() != Eigen::Success) throw NumericalError("bridge proposal covariance is not positive definite");
    const Matrix L = g.chol.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    g.log_norm = -0.5 * static_cast<double>(draws.cols()) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
    return g;
}

double sample_variance(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

double mean_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
}

}  // namespace

BridgeResult bridge_log_ml(const std::vector<ChainDraws>& chains, const Target& target, const BridgeOptions& options) {
    if (chains.empty()) throw ContractError("bridge sampling needs posterior draws");
    const int dim = target.dim();

    // First halves fit the proposal; second halves are the posterior sample.
    std::vector<Vector> fit_rows;
    std::vector<Vector> post;
    std::vector<double> post_lp;
    for (const auto& c : chains) {
        if (c.draws.cols() != dim) throw ContractError("draws do not match the target dimension");
        const Eigen::Index half = c.size() / 2;
        for (Eigen::Index i = 0; i < half; ++i) fit_rows.push_back(c.draws.row(i).transpose());
        for (Eigen::Index i = half; i < c.size(); ++i) {
            post.push_back(c.draws.row(i).transpose());
            post_lp.push_back(c.lp[i]);
        }
    }
    if (fit_rows.size() < static_cast<std::size_t>(dim) + 2 || post.size() < 2)
        throw ContractError("too few draws for bridge sampling");
    Matrix fit(static_cast<Eigen::Index>(fit_rows.size()), dim);
    for (std::size_t i = 0; i < fit_rows.size(); ++i) fit.row(static_cast<Eigen::Index>(i)) = fit_rows[i].transpose();
    const Gaussian proposal = fit_gaussian(fit);

    const auto n1 = static_cast<Eigen::Index>(post.size());
    const Eigen::Index n2 = options.proposal_draws > 0 ? options.proposal_draws : n1;

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Vector> prop(static_cast<std::size_t>(n2));
    for (auto& p : prop) {
        Vector e(dim);
        for (Eigen::Index i = 0; i < dim; ++i) e[i] = z(rng);
        p = proposal.mean + proposal.chol.matrixL() * e;
    }

    // log(target / proposal) at posterior draws (l1) and proposal draws (l2).
    std::vector<double> l1(static_cast<std::size_t>(n1)), l2(static_cast<std::size_t>(n2));
    for (Eigen::Index i = 0; i < n1; ++i)
        l1[static_cast<std::size_t>(i)] = post_lp[static_cast<std::size_t>(i)] - proposal.log_pdf(post[static_cast<std::size_t>(i)]);
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index j = 0; j < n2; ++j) {
        const auto& x = prop[static_cast<std::size_t>(j)];
        l2[static_cast<std::size_t>(j)] = target.log_density(x) - proposal.log_pdf(x);
    }

    const bool any_overlap = std::any_of(l2.begin(), l2.end(), [](double v) { return std::isfinite(v); });
    if (!any_overlap)
        throw NumericalError("bridge proposal has no overlap with the posterior: all proposal draws have zero density");
    for (double v : l1)
        if (!std::isfinite(v)) throw NumericalError("posterior draw with non-finite log density in bridge sample");

    std::vector<double> sorted = l1;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double lstar = sorted[sorted.size() / 2];

    const double s1 = static_cast<double>(n1) / static_cast<double>(n1 + n2);
    const double s2 = static_cast<double>(n2) / static_cast<double>(n1 + n2);
    std::vector<double> e1(l1.size()), e2(l2.size());
    for (std::size_t i = 0; i < l1.size(); ++i) e1[i] = std::exp(l1[i] - lstar);
    for (std::size_t j = 0; j < l2.size(); ++j) e2[j] = std::isfinite(l2[j]) ? std::exp(l2[j] - lstar) : 0.0;

    BridgeResult res;
    double r = 1.0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        double num = 0.0, den = 0.0;
        for (double e : e2) num += e / (s1 * e + s2 * r);
        for (double e : e1) den += 1.0 / (s1 * e + s2 * r);
        num /= static_cast<double>(n2);
        den /= static_cast<double>(n1);
        const double next = num / den;
        if (!std::isfinite(next) || !(next > 0.0))
            throw NumericalError("bridge iteration degenerated (ratio " + std::to_string(next) + ")");
        res.iterations = it;
        const double change = std::abs(next - r) / next;
        r = next;
        if (change < options.tolerance) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged) res.warning = "bridge iteration hit the iteration limit";
    res.log_ml = std::log(r) + lstar;

    // Relative mean-squared error of the estimate.
    std::vector<double> f1(l2.size()), f2(l1.size());
    for (std::size_t j = 0; j < l2.size(); ++j) {
        const double ratio = std::isfinite(l2[j]) ? std::exp(-(l2[j] - res.log_ml)) : std::numeric_limits<double>::infinity();
        f1[j] = 1.0 / (s1 + s2 * ratio);
    }
    for (std::size_t i = 0; i < l1.size(); ++i) f2[i] = 1.0 / (s1 * std::exp(l1[i] - res.log_ml) + s2);

    // Posterior-side autocorrelation: per-chain second halves in original order.
    std::vector<std::vector<double>> f2_chains;
    std::size_t at = 0;
    for (const auto& c : chains) {
        const auto len = static_cast<std::size_t>(c.size() - c.size() / 2);
        f2_chains.emplace_back(f2.begin() + static_cast<std::ptrdiff_t>(at), f2.begin() + static_cast<std::ptrdiff_t>(at + len));
        at += len;
    }
    const std::size_t shortest = std::min_element(f2_chains.begin(), f2_chains.end(), [](const auto& a, const auto& b) {
                                     return a.size() < b.size();
                                 })->size();
    for (auto& c : f2_chains) c.resize(shortest);
    double iat = 1.0;
    if (shortest >= 4 && sample_variance(f2) > 0.0) {
        res.effective_draws = effective_sample_size(f2_chains);
        iat = std::max(1.0, static_cast<double>(shortest * f2_chains.size()) / res.effective_draws);
    } else {
        res.effective_draws = static_cast<double>(f2.size());
    }
    const double m1 = mean_of(f1), m2 = mean_of(f2);
    const double term1 = sample_variance(f1) / (m1 * m1) / static_cast<double>(n2);
    const double term2 = iat * sample_variance(f2) / (m2 * m2) / static_cast<double>(n1);
    res.error = std::sqrt(term1 + term2);
    if (res.effective_draws < 1000.0 && res.warning.empty())
        res.warning = "fewer than 1000 effective posterior draws in the bridge sample";
    return res;
}

LogBayesFactor bayes_factor(double log_ml_a, double error_a, double log_ml_b, double error_b) {
    return {log_ml_a - log_ml_b, std::sqrt(error_a * error_a + error_b * error_b)};
}

LogBayesFactor bayes_factor(const BridgeResult& a, const BridgeResult& b) {
    return bayes_factor(a.log_ml, a.error, b.log_ml, b.error);
}

}  // namespace epi
