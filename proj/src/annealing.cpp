#include "epi/annealing.hpp"

#include <cmath>
#include <random>

#include "epi/errors.hpp"

namespace epi {

double AnnealingSchedule::temperature(int step) const {
    if (initial_temperature == 0.0) return 0.0;
    if (steps <= 1) return final_temperature;
    const double frac = static_cast<double>(step) / (steps - 1);
    return initial_temperature * std::pow(final_temperature / initial_temperature, frac);
}

void AnnealingSchedule::validate() const {
    if (steps < 1) throw ParameterError("annealing needs at least one step");
    if (!(proposal_scale > 0.0) || !(min_scale_fraction > 0.0)) throw ParameterError("proposal scale must be positive");
    const bool greedy = initial_temperature == 0.0 && final_temperature == 0.0;
    if (!greedy && !(initial_temperature > final_temperature && final_temperature > 0.0))
        throw ParameterError("temperature must decrease strictly towards a positive final value");
}

AnnealingResult simulated_annealing(const Target& target, const Vector& init, const AnnealingSchedule& schedule) {
    schedule.validate();
    if (init.size() != target.dim()) throw ParameterError("initial point has the wrong dimension");
    std::mt19937_64 rng(schedule.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    AnnealingResult r;
    r.last = init;
    r.last_value = target.log_density(init);
    r.best = r.last;
    r.best_value = r.last_value;
    r.trace.reserve(static_cast<std::size_t>(schedule.steps));

    const double t0 = schedule.initial_temperature;
    for (int k = 0; k < schedule.steps; ++k) {
        const double temp = schedule.temperature(k);
        const double shrink = t0 > 0.0 ? std::sqrt(temp / t0) : 1.0;
        const double scale = schedule.proposal_scale * std::max(shrink, schedule.min_scale_fraction);
        Vector proposal = r.last;
        for (Eigen::Index i = 0; i < proposal.size(); ++i) proposal[i] += scale * z(rng);
        const double value = target.log_density(proposal);
        const double delta = value - r.last_value;
        bool accept = false;
        if (std::isfinite(value)) {
            if (delta >= 0.0)
                accept = true;
            else if (temp > 0.0)
                accept = unif(rng) < std::exp(delta / temp);
        }
        if (accept) {
            r.last = std::move(proposal);
            r.last_value = value;
            ++r.accepted;
            if (r.last_value > r.best_value || !std::isfinite(r.best_value)) {
                r.best = r.last;
                r.best_value = r.last_value;
            }
        }
        r.trace.push_back(r.last_value);
    }
    return r;
}

}  // namespace epi
