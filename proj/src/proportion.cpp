#include "epi/proportion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epi/errors.hpp"
#include "epi/loess.hpp"

namespace epi {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    return m;
}

void day_column(const std::vector<double>& cases, const Matrix& total, Eigen::Index t, ObservedProportion& out) {
    std::vector<double> valid;
    int excluded = 0;
    for (Eigen::Index s = 0; s < total.rows(); ++s) {
        const double c = total(s, t);
        if (c > 0.0) {
            out.ratio(s, t) = cases[static_cast<std::size_t>(t)] / c;
            valid.push_back(out.ratio(s, t));
        } else {
            out.ratio(s, t) = std::numeric_limits<double>::quiet_NaN();
            ++excluded;
        }
    }
    out.median[static_cast<std::size_t>(t)] = median_of(std::move(valid));
    out.excluded_per_day[static_cast<std::size_t>(t)] = excluded;
}

ObservedProportion prepare(const std::vector<double>& cases, const Matrix& total) {
    if (static_cast<Eigen::Index>(cases.size()) != total.cols())
        throw ParameterError("recorded cases and total-case draws cover different days");
    if (total.rows() < 1) throw ParameterError("need at least one posterior draw");
    ObservedProportion out;
    out.ratio.resize(total.rows(), total.cols());
    out.median.assign(cases.size(), 0.0);
    out.excluded_per_day.assign(cases.size(), 0);
    return out;
}

void finish(ObservedProportion& out, double span) {
    std::vector<double> x, y, all;
    for (std::size_t t = 0; t < out.median.size(); ++t) {
        all.push_back(static_cast<double>(t + 1));
        out.excluded_total += out.excluded_per_day[t];
        if (std::isfinite(out.median[t])) {
            x.push_back(static_cast<double>(t + 1));
            y.push_back(out.median[t]);
        }
    }
    if (x.size() < 2) throw NumericalError("fewer than two days with a defined proportion");
    out.smoothed = loess_smooth(x, y, all, span);
}

}  // namespace

ObservedProportion observed_proportion(const std::vector<double>& cases, const Matrix& total_cases, double span) {
    ObservedProportion out = prepare(cases, total_cases);
    const Eigen::Index days = total_cases.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < days; ++t) day_column(cases, total_cases, t, out);
    finish(out, span);
    return out;
}

namespace serial {

ObservedProportion observed_proportion(const std::vector<double>& cases, const Matrix& total_cases, double span) {
    ObservedProportion out = prepare(cases, total_cases);
    for (Eigen::Index t = 0; t < total_cases.cols(); ++t) day_column(cases, total_cases, t, out);
    finish(out, span);
    return out;
}

}  // namespace serial

}  // namespace epi
