#include "epi/hmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>

#include "epi/rng.hpp"

namespace epi {

namespace {

// Nesterov dual averaging of log step size towards a target acceptance statistic.
class DualAveraging {
public:
    explicit DualAveraging(double target) : target_(target) {}

    void restart(double step) {
        mu_ = std::log(10.0 * step);
        log_step_bar_ = 0.0;
        h_bar_ = 0.0;
        counter_ = 0;
    }

    double learn(double accept_stat) {
        ++counter_;
        const double eta = 1.0 / (counter_ + kT0);
        h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - accept_stat);
        const double log_step = mu_ - std::sqrt(static_cast<double>(counter_)) / kGamma * h_bar_;
        const double w = std::pow(static_cast<double>(counter_), -kKappa);
        log_step_bar_ = w * log_step + (1.0 - w) * log_step_bar_;
        return std::exp(log_step);
    }

    double final_step() const { return std::exp(log_step_bar_); }

private:
    static constexpr double kGamma = 0.05;
    static constexpr double kT0 = 10.0;
    static constexpr double kKappa = 0.75;
    double target_;
    double mu_ = 0.0;
    double log_step_bar_ = 0.0;
    double h_bar_ = 0.0;
    int counter_ = 0;
};

// End iterations of the slow metric-adaptation windows.
std::vector<int> window_ends(const SamplerConfig& c) {
    std::vector<int> ends;
    if (!c.adapt_metric || c.warmup < 20) return ends;
    int init = c.init_buffer, term = c.term_buffer, base = c.base_window;
    if (init + term + base > c.warmup) {
        init = static_cast<int>(0.15 * c.warmup);
        term = static_cast<int>(0.2 * c.warmup);
        base = c.warmup - init - term;
    }
    const int last = c.warmup - term;
    int start = init, size = base;
    while (true) {
        const int end = start + size;
        if (end >= last || end + 2 * size > last) {
            ends.push_back(last);
            break;
        }
        ends.push_back(end);
        start = end;
        size *= 2;
    }
    return ends;
}

int window_start(const SamplerConfig& c, const std::vector<int>& ends, std::size_t idx) {
    if (idx > 0) return ends[idx - 1];
    const int init = (c.init_buffer + c.term_buffer + c.base_window > c.warmup) ? static_cast<int>(0.15 * c.warmup)
                                                                                : c.init_buffer;
    return init;
}

double kinetic(const Vector& p, const Vector& inv_metric) { return 0.5 * (p.array().square() * inv_metric.array()).sum(); }

Vector draw_momentum(std::mt19937_64& rng, const Vector& inv_metric) {
    std::normal_distribution<double> z(0.0, 1.0);
    Vector p(inv_metric.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = z(rng) / std::sqrt(inv_metric[i]);
    return p;
}

struct Position {
    Vector q;
    Vector g;
    double lp = 0.0;
};

// Doubles or halves the step until a single leapfrog step crosses acceptance 0.8.
double find_reasonable_step(const Target& target, const GradientFn& grad, const Position& at, double step,
                            const Vector& inv_metric, const SamplerConfig& c, std::mt19937_64& rng) {
    const double log_threshold = std::log(0.8);
    int direction = 0;
    for (int iter = 0; iter < 100; ++iter) {
        Vector q = at.q, g = at.g;
        Vector p = draw_momentum(rng, inv_metric);
        const double h0 = -at.lp + kinetic(p, inv_metric);
        double delta = -std::numeric_limits<double>::infinity();
        if (leapfrog(target, grad, q, p, g, step, 1, inv_metric)) {
            const double lp = target.log_density(q);
            const double h1 = -lp + kinetic(p, inv_metric);
            if (std::isfinite(h1)) delta = h0 - h1;
        }
        if (direction == 0) direction = delta > log_threshold ? 1 : -1;
        if (direction == 1 && !(delta > log_threshold)) break;
        if (direction == -1 && !(delta < log_threshold)) break;
        step = direction == 1 ? step * 2.0 : step * 0.5;
        if (step >= c.max_step || step <= c.min_step) break;
    }
    return std::clamp(step, c.min_step, c.max_step);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

void SamplerConfig::validate() const {
    if (samples <= 0 || warmup < 0 || thin <= 0) throw ParameterError("sampler iterations must be positive");
    if (!(target_accept > 0.0 && target_accept < 1.0)) throw ParameterError("target acceptance must be in (0, 1)");
    if (!(initial_step > 0.0) || !(min_step > 0.0) || !(max_step > min_step))
        throw ParameterError("invalid step-size bounds");
    if (!(integration_time > 0.0) || max_leapfrog < 1) throw ParameterError("invalid trajectory length settings");
}

bool leapfrog(const Target& target, const GradientFn& grad, Vector& q, Vector& p, Vector& g, double step, int steps,
              const Vector& inv_metric) {
    try {
        for (int s = 0; s < steps; ++s) {
            p += 0.5 * step * g;
            q += step * inv_metric.cwiseProduct(p);
            if (!std::isfinite(target.log_density(q))) return false;
            g = grad(q);
            p += 0.5 * step * g;
        }
    } catch (const GradientError&) {
        return false;
    }
    return g.allFinite() && q.allFinite();
}

ChainDraws hmc_sample(const Target& target, const SamplerConfig& config, int chain) {
    return hmc_sample(target, finite_difference(target), config, chain);
}

ChainDraws hmc_sample(const Target& target, const GradientFn& grad, const SamplerConfig& config, int chain) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int dim = target.dim();

    Position cur;
    cur.q = target.initial_point(rng);
    cur.lp = target.log_density(cur.q);
    if (!std::isfinite(cur.lp)) throw SamplerError("log density is not finite at the initial point");
    try {
        cur.g = grad(cur.q);
    } catch (const GradientError& e) {
        throw SamplerError(std::string("gradient undefined at the initial point: ") + e.what());
    }

    Vector inv_metric = Vector::Ones(dim);
    double step = find_reasonable_step(target, grad, cur, config.initial_step, inv_metric, config, rng);
    DualAveraging averaging(config.target_accept);
    averaging.restart(step);

    const auto ends = window_ends(config);
    std::size_t window = 0;
    std::vector<Vector> window_draws;

    const int retained = config.samples / config.thin;
    ChainDraws out;
    out.names = target.names();
    out.chain = chain;
    out.seed = config.seed;
    out.draws.resize(retained, dim);
    out.lp.resize(retained);

    double accept_sum = 0.0;
    double leapfrog_sum = 0.0;
    int stored = 0;
    const int total = config.warmup + config.samples;
    for (int it = 0; it < total; ++it) {
        const bool warmup = it < config.warmup;
        Vector p = draw_momentum(rng, inv_metric);
        const double h0 = -cur.lp + kinetic(p, inv_metric);
        const int max_steps =
            std::clamp(static_cast<int>(std::ceil(2.0 * config.integration_time / step)), 1, config.max_leapfrog);
        const int steps = std::uniform_int_distribution<int>(1, max_steps)(rng);

        Position next{cur.q, cur.g, 0.0};
        bool ok = leapfrog(target, grad, next.q, p, next.g, step, steps, inv_metric);
        double delta_h = std::numeric_limits<double>::infinity();
        if (ok) {
            next.lp = target.log_density(next.q);
            delta_h = (-next.lp + kinetic(p, inv_metric)) - h0;
        }
        const bool divergent = !ok || !std::isfinite(delta_h) || delta_h > config.max_energy_error;
        const double accept_stat = divergent ? 0.0 : std::min(1.0, std::exp(-delta_h));
        if (!divergent && unif(rng) < accept_stat) cur = std::move(next);

        if (warmup) {
            if (divergent) ++out.adaptation.warmup_divergences;
            step = std::clamp(averaging.learn(accept_stat), config.min_step, config.max_step);
            if (window < ends.size() && it >= window_start(config, ends, window) && it < ends[window])
                window_draws.push_back(cur.q);
            if (window < ends.size() && it + 1 == ends[window]) {
                const auto m = static_cast<double>(window_draws.size());
                if (m >= 2) {
                    Vector mean = Vector::Zero(dim), m2 = Vector::Zero(dim);
                    for (const auto& d : window_draws) mean += d;
                    mean /= m;
                    for (const auto& d : window_draws) m2 += (d - mean).array().square().matrix();
                    const Vector var = m2 / (m - 1.0);
                    inv_metric = (m / (m + 5.0)) * var.array() + 1e-3 * (5.0 / (m + 5.0));
                }
                window_draws.clear();
                ++window;
                step = find_reasonable_step(target, grad, cur, step, inv_metric, config, rng);
                averaging.restart(step);
            }
            if (it + 1 == config.warmup) {
                if (out.adaptation.warmup_divergences == config.warmup)
                    throw SamplerError("every warmup transition diverged");
                step = std::clamp(averaging.final_step(), config.min_step, config.max_step);
            }
        } else {
            accept_sum += accept_stat;
            leapfrog_sum += steps;
            if (divergent) ++out.divergences;
            const int k = it - config.warmup;
            if ((k + 1) % config.thin == 0 && stored < retained) {
                out.draws.row(stored) = cur.q.transpose();
                out.lp[stored] = cur.lp;
                ++stored;
            }
        }
    }

    out.adaptation.step_size = step;
    out.adaptation.inv_metric = inv_metric;
    out.acceptance = accept_sum / config.samples;
    out.mean_leapfrog = leapfrog_sum / config.samples;

    const int n_obs = target.observations();
    out.constrained.resize(retained, dim);
    out.log_prior.resize(retained);
    out.loglik.resize(retained, n_obs);
    for (int i = 0; i < retained; ++i) {
        const Vector q = out.draws.row(i).transpose();
        out.constrained.row(i) = target.constrain(q).transpose();
        out.log_prior[i] = target.log_prior(q);
        if (n_obs > 0) out.loglik.row(i) = target.pointwise_loglik(q).transpose();
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

std::vector<ChainDraws> run_chains(const Target& target, const SamplerConfig& config, int chains) {
    return run_chains(target, finite_difference(target), config, chains);
}

std::vector<ChainDraws> run_chains(const Target& target, const GradientFn& grad, const SamplerConfig& config,
                                   int chains) {
    if (chains < 1) throw ParameterError("need at least one chain");
    std::vector<ChainDraws> out(static_cast<std::size_t>(chains));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
#pragma omp parallel for schedule(dynamic, 1)
    for (int c = 0; c < chains; ++c) {
        try {
            SamplerConfig chain_config = config;
            chain_config.seed = stream_seed(config.seed, static_cast<std::uint64_t>(c));
            out[static_cast<std::size_t>(c)] = hmc_sample(target, grad, chain_config, c);
        } catch (...) {
            errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

namespace serial {

std::vector<ChainDraws> run_chains(const Target& target, const SamplerConfig& config, int chains) {
    return serial::run_chains(target, finite_difference(target), config, chains);
}

std::vector<ChainDraws> run_chains(const Target& target, const GradientFn& grad, const SamplerConfig& config,
                                   int chains) {
    if (chains < 1) throw ParameterError("need at least one chain");
    std::vector<ChainDraws> out;
    for (int c = 0; c < chains; ++c) {
        SamplerConfig chain_config = config;
        chain_config.seed = stream_seed(config.seed, static_cast<std::uint64_t>(c));
        out.push_back(hmc_sample(target, grad, chain_config, c));
    }
    return out;
}

}  // namespace serial

ChainDraws merge_chains(const std::vector<ChainDraws>& chains) {
    if (chains.empty()) throw ContractError("no chains to merge");
    ChainDraws out;
    out.names = chains.front().names;
    Eigen::Index rows = 0;
    for (const auto& c : chains) rows += c.size();
    const auto cols = chains.front().draws.cols();
    const auto obs = chains.front().loglik.cols();
    out.draws.resize(rows, cols);
    out.constrained.resize(rows, cols);
    out.lp.resize(rows);
    out.log_prior.resize(rows);
    out.loglik.resize(rows, obs);
    Eigen::Index at = 0;
    for (const auto& c : chains) {
        if (c.draws.cols() != cols || c.loglik.cols() != obs) throw ContractError("chains have different shapes");
        out.draws.middleRows(at, c.size()) = c.draws;
        out.constrained.middleRows(at, c.size()) = c.constrained;
        out.lp.segment(at, c.size()) = c.lp;
        out.log_prior.segment(at, c.size()) = c.log_prior;
        out.loglik.middleRows(at, c.size()) = c.loglik;
        out.divergences += c.divergences;
        out.acceptance += c.acceptance / static_cast<double>(chains.size());
        at += c.size();
    }
    return out;
}

std::uint64_t hash_draws(const ChainDraws& draws) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    h = fnv1a(h, draws.draws.data(), sizeof(double) * static_cast<std::size_t>(draws.draws.size()));
    h = fnv1a(h, draws.lp.data(), sizeof(double) * static_cast<std::size_t>(draws.lp.size()));
    return h;
}

std::uint64_t hash_draws(const std::vector<ChainDraws>& chains) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const auto& c : chains) {
        const std::uint64_t part = hash_draws(c);
        h = fnv1a(h, &part, sizeof(part));
    }
    return h;
}

}  // namespace epi
