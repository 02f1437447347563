#include "epi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "epi/errors.hpp"

namespace epi {

namespace {

using Chains = std::vector<std::vector<double>>;

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

Chains split(const Chains& chains) {
    Chains out;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
        out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
    }
    return out;
}

// Replaces pooled draws by normal scores of their fractional ranks (ties averaged).
Chains rank_normalize(const Chains& chains) {
    std::vector<std::pair<double, std::size_t>> pooled;
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (std::size_t i = 0; i < chains[c].size(); ++i) pooled.emplace_back(chains[c][i], c * chains[0].size() + i);
    std::sort(pooled.begin(), pooled.end());
    const auto S = static_cast<double>(pooled.size());
    std::vector<double> score(pooled.size());
    const boost::math::normal_distribution<double> normal;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        const double z = boost::math::quantile(normal, (rank - 0.375) / (S + 0.25));
        for (std::size_t k = i; k <= j; ++k) score[pooled[k].second] = z;
        i = j + 1;
    }
    Chains out = chains;
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (std::size_t i = 0; i < chains[c].size(); ++i) out[c][i] = score[c * chains[0].size() + i];
    return out;
}

Chains fold(const Chains& chains) {
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2), all.end());
    double med = all[all.size() / 2];
    if (all.size() % 2 == 0) {
        const double lower = *std::max_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2));
        med = 0.5 * (med + lower);
    }
    Chains out = chains;
    for (auto& c : out)
        for (double& x : c) x = std::abs(x - med);
    return out;
}

// Biased autocovariance up to `max_lag`.
std::vector<double> autocovariance(const std::vector<double>& x, std::size_t max_lag) {
    const double m = mean(x);
    const std::size_t n = x.size();
    std::vector<double> acov(max_lag + 1, 0.0);
    for (std::size_t lag = 0; lag <= max_lag && lag < n; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += (x[i] - m) * (x[i + lag] - m);
        acov[lag] = acc / static_cast<double>(n);
    }
    return acov;
}

bool constant(const Chains& chains) {
    const double first = chains.front().front();
    for (const auto& c : chains)
        for (double x : c)
            if (x != first) return false;
    return true;
}

void check_shape(const Chains& chains) {
    if (chains.empty() || chains.front().size() < 4) throw ContractError("diagnostics need draws");
    for (const auto& c : chains)
        if (c.size() != chains.front().size()) throw ContractError("chains must have equal lengths");
}

}  // namespace

double basic_rhat(const Chains& chains) {
    const auto n = static_cast<double>(chains.front().size());
    const auto m = static_cast<double>(chains.size());
    std::vector<double> means, vars;
    for (const auto& c : chains) {
        means.push_back(mean(c));
        vars.push_back(variance(c));
    }
    const double W = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
    const double B_over_n = m > 1 ? variance(means) : 0.0;
    const double var_plus = (n - 1.0) / n * W + B_over_n;
    return std::sqrt(var_plus / W);
}

// Geyer initial monotone sequence over the multi-chain autocorrelation.
double effective_sample_size(const Chains& chains) {
    const std::size_t n = chains.front().size();
    const auto m = static_cast<double>(chains.size());
    const auto nd = static_cast<double>(n);
    std::vector<std::vector<double>> acov;
    std::vector<double> means, vars;
    for (const auto& c : chains) {
        acov.push_back(autocovariance(c, n - 1));
        means.push_back(mean(c));
        vars.push_back(acov.back()[0] * nd / (nd - 1.0));
    }
    const double W = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
    double var_plus = W * (nd - 1.0) / nd;
    if (chains.size() > 1) var_plus += variance(means);

    auto rho_at = [&](std::size_t t) {
        double a = 0.0;
        for (const auto& ac : acov) a += ac[t];
        return 1.0 - (W - a / m) / var_plus;
    };
    // Pair sums rho_{2k} + rho_{2k+1}, kept while positive and forced monotone.
    double sum = 0.0;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t + 1 < n; t += 2) {
        const double pair = (t == 0 ? 1.0 : rho_at(t)) + rho_at(t + 1);
        if (!(pair > 0.0)) break;
        previous = std::min(previous, pair);
        sum += previous;
    }
    double tau = -1.0 + 2.0 * sum;
    tau = std::max(tau, 1.0 / std::log10(m * nd));
    return m * nd / tau;
}

ParameterDiagnostics diagnose(const Chains& series, const std::string& name) {
    check_shape(series);
    ParameterDiagnostics d;
    d.name = name;
    const Chains halves = split(series);
    if (halves.size() < 4) throw ContractError("diagnostics need at least four split chains");
    if (constant(halves)) return d;
    for (const auto& h : halves)
        if (variance(h) == 0.0) return d;

    const Chains bulk = rank_normalize(halves);
    const Chains tail = rank_normalize(fold(halves));
    d.rhat = std::max(basic_rhat(bulk), basic_rhat(tail));
    d.ess_bulk = effective_sample_size(bulk);

    // Tail ESS: minimum over the 5% and 95% quantile indicators.
    std::vector<double> all;
    for (const auto& h : halves) all.insert(all.end(), h.begin(), h.end());
    std::sort(all.begin(), all.end());
    auto quantile = [&](double q) { return all[static_cast<std::size_t>(q * static_cast<double>(all.size() - 1))]; };
    double ess_tail = std::numeric_limits<double>::infinity();
    for (double q : {0.05, 0.95}) {
        const double cut = quantile(q);
        Chains ind = halves;
        for (auto& h : ind)
            for (double& x : h) x = x <= cut ? 1.0 : 0.0;
        bool usable = true;
        for (const auto& h : ind)
            if (variance(h) == 0.0) usable = false;
        if (usable) ess_tail = std::min(ess_tail, effective_sample_size(ind));
    }
    if (std::isfinite(ess_tail)) d.ess_tail = ess_tail;
    return d;
}

std::vector<ParameterDiagnostics> diagnostics(const std::vector<ChainDraws>& chains) {
    if (chains.size() < 2) throw ContractError("diagnostics need at least two chains");
    const auto params = chains.front().constrained.cols();
    std::vector<ParameterDiagnostics> out;
    for (Eigen::Index j = 0; j < params; ++j) {
        Chains series;
        for (const auto& c : chains) {
            if (c.constrained.cols() != params) throw ContractError("chains have different parameter counts");
            series.emplace_back(c.constrained.col(j).data(), c.constrained.col(j).data() + c.constrained.rows());
        }
        const std::string name = j < static_cast<Eigen::Index>(chains.front().names.size())
                                      ? chains.front().names[static_cast<std::size_t>(j)]
                                      : "x" + std::to_string(j + 1);
        out.push_back(diagnose(series, name));
    }
    return out;
}

}  // namespace epi
