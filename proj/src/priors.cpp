#include "epi/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "epi/errors.hpp"

namespace epi {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}  // namespace

double LogNormalPrior::log_pdf(double x) const {
    if (!(x > 0.0)) return kNegInf;
    const double z = (std::log(x) - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi - std::log(x);
}

double LogNormalPrior::median() const { return std::exp(mu); }

double GammaPrior::log_pdf(double x) const {
    if (!(x > 0.0)) return kNegInf;
    return shape * std::log(rate) - boost::math::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double GammaPrior::median() const { return boost::math::gamma_p_inv(shape, 0.5) / rate; }

double GammaPrior::mode() const { return shape >= 1.0 ? (shape - 1.0) / rate : 0.0; }

double NormalPrior::log_pdf(double x) const {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

void PriorSpec::validate(int ifr_segments) const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(lambda.sigma) || !positive(psi.shape) || !positive(psi.rate) || !positive(c_init.shape) ||
        !positive(c_init.rate) || !positive(sigma.sigma))
        throw ParameterError("prior hyperparameters must be positive");
    if (!(ifr_sd >= 0.0)) throw ParameterError("IFR prior sd must be non-negative");
    if (static_cast<int>(ifr_means.size()) != ifr_segments)
        throw ParameterError("need one IFR prior mean per IFR segment");
    for (double m : ifr_means)
        if (!(m > 0.0 && m < 1.0)) throw ParameterError("IFR prior means must lie in (0, 1)");
}

std::vector<double> daily_ifr(const AgeCaseMatrix& acm, int first_day, int last_day) {
    std::vector<double> out;
    for (int t = first_day; t <= last_day; ++t) {
        if (t < 1 || static_cast<std::size_t>(t) > acm.counts.size())
            throw ElicitationError("day " + std::to_string(t) + " has no age-group counts");
        const auto& row = acm.counts[static_cast<std::size_t>(t - 1)];
        double total = 0.0, weighted = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            if (row[k] < 0.0) throw ElicitationError("negative age-group count on day " + std::to_string(t));
            total += row[k];
            weighted += acm.reference_ifr[k] * row[k];
        }
        if (!(total > 0.0)) throw ElicitationError("no cases in any age group on day " + std::to_string(t));
        out.push_back(weighted / total);
    }
    return out;
}

std::vector<double> elicit_ifr(const AgeCaseMatrix& acm, const std::vector<int>& ifr_breaks) {
    if (ifr_breaks.size() < 2) throw ElicitationError("need at least one IFR segment");
    std::vector<double> means;
    for (std::size_t b = 0; b + 1 < ifr_breaks.size(); ++b) {
        const int lo = ifr_breaks[b], hi = ifr_breaks[b + 1];
        if (hi <= lo) throw ElicitationError("IFR breaks must be strictly increasing");
        const auto daily = daily_ifr(acm, lo, hi - 1);
        double acc = 0.0;
        for (double p : daily) acc += p;
        means.push_back(acc / (hi - lo));
    }
    return means;
}

}  // namespace epi
