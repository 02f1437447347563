#pragma once

#include <cstddef>
#include <vector>

namespace epi {

enum class DelayKind { infection_to_death, serial_interval, infection_to_recovery };

struct GammaComponent {
    double shape = 1.0;
    double rate = 1.0;
};

// A delay distribution given as one Gamma or the sum of two independent Gammas.
struct DelaySpec {
    std::vector<GammaComponent> components;

    static DelaySpec gamma(double shape, double rate) { return {{{shape, rate}}}; }
    static DelaySpec gamma_sum(GammaComponent a, GammaComponent b) { return {{a, b}}; }

    // Infection-to-onset plus onset-to-death.
    static DelaySpec infection_to_death_default() { return gamma_sum({1.35, 0.27}, {4.94, 0.26}); }

    double mean() const;
};

// Discretized delay masses; masses()[s - 1] holds the mass on day s = 1..horizon-1.
class DelayPMF {
public:
    DelayPMF() = default;
    DelayPMF(std::vector<double> masses, DelayKind kind);

    // Mass for a delay of `day` days; zero outside 1..size().
    double operator()(long day) const noexcept {
        return (day >= 1 && static_cast<std::size_t>(day) <= masses_.size()) ? masses_[day - 1] : 0.0;
    }

    const std::vector<double>& masses() const noexcept { return masses_; }
    std::size_t size() const noexcept { return masses_.size(); }
    DelayKind kind() const noexcept { return kind_; }
    double total() const noexcept;
    double mean() const noexcept;

private:
    std::vector<double> masses_;
    DelayKind kind_ = DelayKind::infection_to_death;
};

// CDF of the (possibly summed) delay at time t. For two components the inner
// integral runs over a grid of width `grid_step` on the first component,
// truncated at its 1 - 1e-8 quantile.
double delay_cdf(const DelaySpec& spec, double t, double grid_step = 0.01);

// pi_1 = F(1.5), pi_s = F(s + 0.5) - F(s - 0.5) for s = 2..horizon-1.
// Results are cached per (spec, horizon, step); the cache is safe under concurrent use.
DelayPMF discretize_delay(const DelaySpec& spec, int horizon, DelayKind kind = DelayKind::infection_to_death,
                          double grid_step = 0.01);

}  // namespace epi
