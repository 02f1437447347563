#pragma once

#include <optional>
#include <vector>

#include "epi/target.hpp"

namespace epi {

// Daily covariance and correlation, across posterior draws, between the infection
// rate and the susceptible scaling factor tau * S_t / N.
struct EndemicityDiagnostic {
    std::vector<double> covariance;
    std::vector<double> lower;  // 50% interval of the covariance (normal approximation)
    std::vector<double> upper;
    std::vector<std::optional<double>> correlation;  // empty on zero-variance days
    std::optional<int> first_negative_day;           // first day with upper < 0 (1-based)
};

// `rates` and `susceptibles` are draws x days.
EndemicityDiagnostic endemicity_diagnostic(const Matrix& rates, const Matrix& susceptibles, double tau, double N);

namespace serial {
EndemicityDiagnostic endemicity_diagnostic(const Matrix& rates, const Matrix& susceptibles, double tau, double N);
}

}  // namespace epi
