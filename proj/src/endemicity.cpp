#include "epi/endemicity.hpp"

#include <cmath>

#include "epi/errors.hpp"

namespace epi {

namespace {

// 0.75 quantile of the standard normal.
constexpr double kQuartileZ = 0.6744897501960817;

void check(const Matrix& rates, const Matrix& susceptibles, double N) {
    if (rates.rows() != susceptibles.rows() || rates.cols() != susceptibles.cols())
        throw ParameterError("rate and susceptible draws differ in shape");
    if (rates.rows() < 2) throw ParameterError("endemicity diagnostic needs at least two draws per day");
    if (!(N > 0.0)) throw ParameterError("population must be positive");
}

void day(const Matrix& rates, const Matrix& susceptibles, double tau, double N, Eigen::Index t,
         EndemicityDiagnostic& out) {
    const Vector a = rates.col(t);
    const Vector b = (tau / N) * susceptibles.col(t);
    const auto m = static_cast<double>(a.size());
    const Vector da = a.array() - a.mean();
    const Vector db = b.array() - b.mean();
    const bool flat = a.minCoeff() == a.maxCoeff() || b.minCoeff() == b.maxCoeff();
    const Vector prod = flat ? Vector::Zero(a.size()) : Vector(da.cwiseProduct(db));
    const double cov = prod.sum() / (m - 1.0);
    const double prod_mean = prod.mean();
    const double prod_var = (prod.array() - prod_mean).square().sum() / (m - 1.0);
    const double se = std::sqrt(prod_var / m) * m / (m - 1.0);
    const auto i = static_cast<std::size_t>(t);
    out.covariance[i] = cov;
    out.lower[i] = cov - kQuartileZ * se;
    out.upper[i] = cov + kQuartileZ * se;
    const double va = da.squaredNorm(), vb = db.squaredNorm();
    if (!flat && va > 0.0 && vb > 0.0) out.correlation[i] = prod.sum() / std::sqrt(va * vb);
}

EndemicityDiagnostic prepare(const Matrix& rates) {
    EndemicityDiagnostic out;
    const auto days = static_cast<std::size_t>(rates.cols());
    out.covariance.assign(days, 0.0);
    out.lower.assign(days, 0.0);
    out.upper.assign(days, 0.0);
    out.correlation.assign(days, std::nullopt);
    return out;
}

void locate(EndemicityDiagnostic& out) {
    for (std::size_t t = 0; t < out.upper.size(); ++t) {
        if (out.upper[t] < 0.0) {
            out.first_negative_day = static_cast<int>(t) + 1;
            return;
        }
    }
}

}  // namespace

EndemicityDiagnostic endemicity_diagnostic(const Matrix& rates, const Matrix& susceptibles, double tau, double N) {
    check(rates, susceptibles, N);
    EndemicityDiagnostic out = prepare(rates);
    const Eigen::Index days = rates.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < days; ++t) day(rates, susceptibles, tau, N, t, out);
    locate(out);
    return out;
}

namespace serial {

EndemicityDiagnostic endemicity_diagnostic(const Matrix& rates, const Matrix& susceptibles, double tau, double N) {
    check(rates, susceptibles, N);
    EndemicityDiagnostic out = prepare(rates);
    for (Eigen::Index t = 0; t < rates.cols(); ++t) day(rates, susceptibles, tau, N, t, out);
    locate(out);
    return out;
}

}  // namespace serial

}  // namespace epi
