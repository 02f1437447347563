#include "epi/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "epi/annealing.hpp"
#include "epi/errors.hpp"

namespace epi {

namespace {

// log mean exp and sample variance of one observation's column.
std::pair<double, double> column_terms(const Matrix& loglik, Eigen::Index t) {
    const auto col = loglik.col(t);
    const double top = col.maxCoeff();
    const double lme = top + std::log((col.array() - top).exp().mean());
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1);
    return {lme, var};
}

ModelScore assemble(const Matrix& loglik, double loglik_at_mean, int k, double lppd, double p_waic) {
    if (loglik.rows() < 2 || loglik.cols() < 1)
        throw ContractError("information criteria need a pointwise log-likelihood matrix with at least two draws");
    if (k <= 0) throw ContractError("parameter count must be positive");
    ModelScore s;
    s.k = k;
    s.n = static_cast<int>(loglik.cols());
    const Vector total = loglik.rowwise().sum();
    s.max_loglik = total.maxCoeff();
    s.aic = 2.0 * k - 2.0 * s.max_loglik;
    s.bic = k * std::log(static_cast<double>(s.n)) - 2.0 * s.max_loglik;

    const Vector deviance = -2.0 * total;
    s.mean_deviance = deviance.mean();
    const double var_dev =
        (deviance.array() - s.mean_deviance).square().sum() / static_cast<double>(deviance.size() - 1);
    s.deviance_at_mean = -2.0 * loglik_at_mean;
    s.p_dic = s.mean_deviance - s.deviance_at_mean;
    s.dic = s.deviance_at_mean + 2.0 * s.p_dic;
    s.p_dic2 = 0.5 * var_dev;
    s.dic2 = s.deviance_at_mean + 2.0 * s.p_dic2;

    s.lppd = lppd;
    s.p_waic = p_waic;
    s.waic = -2.0 * (lppd - p_waic);
    return s;
}

}  // namespace

std::pair<double, double> waic_terms(const Matrix& loglik) {
    const Eigen::Index n = loglik.cols();
    double lppd = 0.0, p = 0.0;
#pragma omp parallel for reduction(+ : lppd, p) schedule(static)
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto [lme, var] = column_terms(loglik, t);
        lppd += lme;
        p += var;
    }
    return {lppd, p};
}

ModelScore information_criteria(const Matrix& loglik, double loglik_at_mean, int k) {
    if (loglik.rows() < 2 || loglik.cols() < 1) return assemble(loglik, loglik_at_mean, k, 0.0, 0.0);
    const auto [lppd, p] = waic_terms(loglik);
    return assemble(loglik, loglik_at_mean, k, lppd, p);
}

ModelScore information_criteria(const ChainDraws& draws, const Target& target, int k, bool refine_max,
                                std::uint64_t seed) {
    if (draws.loglik.cols() == 0) throw ContractError("draws carry no pointwise log-likelihood matrix");
    const Vector mean_point = draws.draws.colwise().mean().transpose();
    const double at_mean = target.pointwise_loglik(mean_point).sum();
    ModelScore s = information_criteria(draws.loglik, at_mean, k);
    if (refine_max) {
        Eigen::Index best = 0;
        draws.loglik.rowwise().sum().maxCoeff(&best);
        const FunctionTarget likelihood(target.dim(), [&target](const Vector& x) {
            const double lp = target.log_density(x);
            return std::isfinite(lp) ? lp - target.log_prior(x) : lp;
        });
        AnnealingSchedule schedule;
        schedule.initial_temperature = 1.0;
        schedule.final_temperature = 1e-4;
        schedule.steps = 5000;
        schedule.proposal_scale = 0.05;
        schedule.seed = seed;
        const auto r = simulated_annealing(likelihood, draws.draws.row(best).transpose(), schedule);
        if (r.best_value > s.max_loglik) {
            s.max_loglik = r.best_value;
            s.aic = 2.0 * k - 2.0 * s.max_loglik;
            s.bic = k * std::log(static_cast<double>(s.n)) - 2.0 * s.max_loglik;
        }
    }
    return s;
}

namespace serial {

std::pair<double, double> waic_terms(const Matrix& loglik) {
    double lppd = 0.0, p = 0.0;
    for (Eigen::Index t = 0; t < loglik.cols(); ++t) {
        const auto [lme, var] = column_terms(loglik, t);
        lppd += lme;
        p += var;
    }
    return {lppd, p};
}

ModelScore information_criteria(const Matrix& loglik, double loglik_at_mean, int k) {
    if (loglik.rows() < 2 || loglik.cols() < 1) return assemble(loglik, loglik_at_mean, k, 0.0, 0.0);
    const auto [lppd, p] = waic_terms(loglik);
    return assemble(loglik, loglik_at_mean, k, lppd, p);
}

}  // namespace serial

}  // namespace epi
