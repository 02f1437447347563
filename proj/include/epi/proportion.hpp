#pragma once

#include <vector>

#include "epi/target.hpp"

namespace epi {

// Second stage of the cut-feedback analysis: recorded cases against posterior
// total cases. Stage-one draws are only read.
struct ObservedProportion {
    Matrix ratio;                      // draws x days; NaN where the draw had no total cases
    std::vector<double> median;        // per day, NaN when every draw was excluded
    std::vector<double> smoothed;      // loess of the median curve, evaluated on every day
    std::vector<int> excluded_per_day;
    int excluded_total = 0;
};

// `cases[t]` is the recorded count on day t + 1; `total_cases` is draws x days.
ObservedProportion observed_proportion(const std::vector<double>& cases, const Matrix& total_cases, double span = 0.3);

namespace serial {
ObservedProportion observed_proportion(const std::vector<double>& cases, const Matrix& total_cases, double span = 0.3);
}

}  // namespace epi
