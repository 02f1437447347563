#include "epi/gradient.hpp"

#include <cmath>
#include <limits>

namespace epi {

Vector finite_difference_gradient(const ScalarFn& f, const Vector& x) {
    static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = base * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + step;
        const double up = f(probe);
        probe[i] = x[i] - step;
        const double down = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(up) || !std::isfinite(down))
            throw GradientError("non-finite log density next to coordinate " + std::to_string(i),
                                static_cast<int>(i));
        // The realised step (x + h) - (x - h) can differ from 2h in floating point.
        g[i] = (up - down) / ((x[i] + step) - (x[i] - step));
    }
    return g;
}

Vector finite_difference_gradient(const Target& target, const Vector& x) {
    return finite_difference_gradient([&target](const Vector& v) { return target.log_density(v); }, x);
}

GradientFn finite_difference(const Target& target) {
    return [&target](const Vector& x) { return finite_difference_gradient(target, x); };
}

}  // namespace epi
