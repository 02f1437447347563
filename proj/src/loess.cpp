#include "epi/loess.hpp"

#include <algorithm>
#include <cmath>

#include "epi/errors.hpp"

namespace epi {

namespace {

void check(const std::vector<double>& x, const std::vector<double>& y, double span) {
    if (x.size() != y.size()) throw ParameterError("loess inputs differ in length");
    if (x.size() < 2) throw ParameterError("loess needs at least two points");
    if (!(span > 0.0)) throw ParameterError("loess span must be positive");
}

double tricube(double u) {
    if (u >= 1.0) return 0.0;
    const double c = 1.0 - u * u * u;
    return c * c * c;
}

}  // namespace

double loess_at(const std::vector<double>& x, const std::vector<double>& y, double x0, double span) {
    check(x, y, span);
    const std::size_t n = x.size();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(x[i] - x0);

    const auto q = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))), 3, n);
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q - 1), sorted.end());
    double bandwidth = sorted[q - 1];
    if (span > 1.0) bandwidth *= span;

    double sw = 0.0, sx = 0.0, sy = 0.0;
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = bandwidth > 0.0 ? tricube(dist[i] / bandwidth) : (dist[i] == 0.0 ? 1.0 : 0.0);
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    if (!(sw > 0.0)) throw NumericalError("loess neighbourhood has no weight");
    const double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    // A neighbourhood with a single distinct x falls back to the weighted mean.
    if (sxx <= 1e-14 * sw * std::max(1.0, xbar * xbar)) return ybar;
    return ybar + (sxy / sxx) * (x0 - xbar);
}

std::vector<double> loess_smooth(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& at, double span) {
    check(x, y, span);
    std::vector<double> out(at.size());
    const auto m = static_cast<std::ptrdiff_t>(at.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = loess_at(x, y, at[static_cast<std::size_t>(i)], span);
    return out;
}

std::vector<double> loess_smooth(const std::vector<double>& x, const std::vector<double>& y, double span) {
    return loess_smooth(x, y, x, span);
}

namespace serial {

std::vector<double> loess_smooth(const std::vector<double>& x, const std::vector<double>& y, double span) {
    check(x, y, span);
    std::vector<double> out;
    out.reserve(x.size());
    for (double x0 : x) out.push_back(loess_at(x, y, x0, span));
    return out;
}

}  // namespace serial

}  // namespace epi
