#pragma once

#include <vector>

namespace epi {

// Degree-1 local regression with tricube weights over the nearest
// ceil(span * n) points (at least three).
double loess_at(const std::vector<double>& x, const std::vector<double>& y, double x0, double span = 0.3);

// Fitted values at every x; OpenMP over evaluation points.
std::vector<double> loess_smooth(const std::vector<double>& x, const std::vector<double>& y, double span = 0.3);

// Fitted values at arbitrary evaluation points.
std::vector<double> loess_smooth(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& at, double span = 0.3);

namespace serial {
std::vector<double> loess_smooth(const std::vector<double>& x, const std::vector<double>& y, double span = 0.3);
}

}  // namespace epi
