#include "epi/delay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include <boost/math/special_functions/gamma.hpp>

#include "epi/errors.hpp"

namespace epi {

namespace {

constexpr double kTailProbability = 1e-8;

void validate(const DelaySpec& spec) {
    if (spec.components.empty() || spec.components.size() > 2)
        throw ParameterError("delay spec needs one or two Gamma components");
    for (const auto& c : spec.components) {
        if (!(c.shape > 0.0) || !(c.rate > 0.0) || !std::isfinite(c.shape) || !std::isfinite(c.rate))
            throw ParameterError("Gamma delay component needs positive finite shape and rate");
    }
}

double gamma_cdf(const GammaComponent& g, double x) {
    return x <= 0.0 ? 0.0 : boost::math::gamma_p(g.shape, g.rate * x);
}

double gamma_pdf(const GammaComponent& g, double x) {
    return x <= 0.0 ? 0.0 : g.rate * boost::math::gamma_p_derivative(g.shape, g.rate * x);
}

// Derivative of the Gamma density.
double gamma_pdf_slope(const GammaComponent& g, double x) {
    return x <= 0.0 ? 0.0 : gamma_pdf(g, x) * ((g.shape - 1.0) / x - g.rate);
}

// Moments of the measure dG(s) over a grid cell [a, b], centred on the cell midpoint.
struct CellMoments {
    double mid = 0.0;
    double m0 = 0.0;  // integral of dG
    double m1 = 0.0;  // integral of (s - mid) dG
    double m2 = 0.0;  // integral of (s - mid)^2 dG
};

std::vector<CellMoments> cell_moments(const GammaComponent& g, double step) {
    const double upper = boost::math::gamma_p_inv(g.shape, 1.0 - kTailProbability) / g.rate;
    const auto cells = static_cast<std::size_t>(std::ceil(upper / step));
    std::vector<CellMoments> out(cells);

    auto partial = [&](double shape_offset, double x) {
        return x <= 0.0 ? 0.0 : boost::math::gamma_p(g.shape + shape_offset, g.rate * x);
    };
    const double k = g.shape, r = g.rate;
    double p0_prev = 0.0, p1_prev = 0.0, p2_prev = 0.0;
    for (std::size_t j = 0; j < cells; ++j) {
        const double b = static_cast<double>(j + 1) * step;
        const double p0 = partial(0.0, b), p1 = partial(1.0, b), p2 = partial(2.0, b);
        const double mass = p0 - p0_prev;
        const double first = (k / r) * (p1 - p1_prev);
        const double second = (k * (k + 1.0) / (r * r)) * (p2 - p2_prev);
        const double c = (static_cast<double>(j) + 0.5) * step;
        out[j] = {c, mass, first - c * mass, second - 2.0 * c * first + c * c * mass};
        p0_prev = p0;
        p1_prev = p1;
        p2_prev = p2;
    }
    return out;
}

// Orders the two components so the smoother (larger shape) one supplies the CDF.
std::pair<GammaComponent, GammaComponent> measure_and_smooth(const DelaySpec& spec) {
    auto a = spec.components[0], b = spec.components[1];
    if (a.shape > b.shape) std::swap(a, b);
    return {a, b};
}

double convolved_cdf(const std::vector<CellMoments>& cells, const GammaComponent& smooth, double t) {
    double acc = 0.0;
    for (const auto& cell : cells) {
        const double x = t - cell.mid;
        if (x <= 0.0) break;
        acc += cell.m0 * gamma_cdf(smooth, x) - cell.m1 * gamma_pdf(smooth, x) +
               0.5 * cell.m2 * gamma_pdf_slope(smooth, x);
    }
    return acc;
}

using CacheKey = std::tuple<std::vector<double>, int, int, double>;

}  // namespace

double DelaySpec::mean() const {
    double m = 0.0;
    for (const auto& c : components) m += c.shape / c.rate;
    return m;
}

DelayPMF::DelayPMF(std::vector<double> masses, DelayKind kind) : masses_(std::move(masses)), kind_(kind) {
    for (double m : masses_) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw ParameterError("delay masses must be finite and non-negative");
    }
    if (total() > 1.0 + 1e-12) throw ParameterError("delay masses sum above one");
}

double DelayPMF::total() const noexcept { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

double DelayPMF::mean() const noexcept {
    double m = 0.0;
    for (std::size_t s = 0; s < masses_.size(); ++s) m += static_cast<double>(s + 1) * masses_[s];
    return m;
}

double delay_cdf(const DelaySpec& spec, double t, double grid_step) {
    validate(spec);
    if (spec.components.size() == 1) return gamma_cdf(spec.components[0], t);
    if (!(grid_step > 0.0)) throw ParameterError("grid step must be positive");
    const auto [measure, smooth] = measure_and_smooth(spec);
    return std::clamp(convolved_cdf(cell_moments(measure, grid_step), smooth, t), 0.0, 1.0);
}

DelayPMF discretize_delay(const DelaySpec& spec, int horizon, DelayKind kind, double grid_step) {
    validate(spec);
    if (horizon < 3) throw ParameterError("delay horizon must be at least 3");

    static std::mutex cache_mutex;
    static std::map<CacheKey, DelayPMF> cache;
    std::vector<double> flat;
    for (const auto& c : spec.components) {
        flat.push_back(c.shape);
        flat.push_back(c.rate);
    }
    CacheKey key{flat, horizon, static_cast<int>(kind), grid_step};
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    std::vector<double> cdf(static_cast<std::size_t>(horizon));  // cdf[s] = F(s + 0.5), s = 1..horizon-1
    if (spec.components.size() == 1) {
        for (int s = 1; s < horizon; ++s) cdf[s] = gamma_cdf(spec.components[0], s + 0.5);
    } else {
        const double half_cells = 0.5 / grid_step;
        if (!(grid_step > 0.0) || std::abs(half_cells - std::round(half_cells)) > 1e-9)
            throw ParameterError("grid step must divide 0.5 days");
        const auto [measure, smooth] = measure_and_smooth(spec);
        const auto cells = cell_moments(measure, grid_step);
        // Every evaluation point t - mid lies on the half-integer grid (m + 0.5) * step.
        const auto points = static_cast<std::size_t>(std::llround((horizon + 0.5) / grid_step)) + 1;
        std::vector<double> G(points), g(points), dg(points);
        for (std::size_t m = 0; m < points; ++m) {
            const double x = (static_cast<double>(m) + 0.5) * grid_step;
            G[m] = gamma_cdf(smooth, x);
            g[m] = gamma_pdf(smooth, x);
            dg[m] = gamma_pdf_slope(smooth, x);
        }
        for (int s = 1; s < horizon; ++s) {
            const auto t_cells = static_cast<std::size_t>(std::llround((s + 0.5) / grid_step));
            const std::size_t limit = std::min(t_cells, cells.size());
            double acc = 0.0;
            for (std::size_t j = 0; j < limit; ++j) {
                const std::size_t m = t_cells - j - 1;
                acc += cells[j].m0 * G[m] - cells[j].m1 * g[m] + 0.5 * cells[j].m2 * dg[m];
            }
            cdf[s] = std::clamp(acc, 0.0, 1.0);
        }
    }

    std::vector<double> masses(static_cast<std::size_t>(horizon - 1));
    masses[0] = cdf[1];
    for (int s = 2; s < horizon; ++s) masses[s - 1] = std::max(0.0, cdf[s] - cdf[s - 1]);
    DelayPMF pmf(std::move(masses), kind);

    std::lock_guard lock(cache_mutex);
    return cache.try_emplace(std::move(key), std::move(pmf)).first->second;
}

}  // namespace epi
