#pragma once

#include <array>
#include <vector>

namespace epi {

struct LogNormalPrior {
    double mu = 0.0;
    double sigma = 1.0;
    double log_pdf(double x) const;
    double median() const;
};

// Gamma with shape/rate parameterisation.
struct GammaPrior {
    double shape = 2.0;
    double rate = 1.0;
    double log_pdf(double x) const;
    double median() const;
    double mode() const;
};

struct NormalPrior {
    double mean = 0.0;
    double sd = 1.0;
    double log_pdf(double x) const;
};

struct PriorSpec {
    LogNormalPrior lambda{0.0, 1.0};
    GammaPrior psi{2.0, 0.125};
    GammaPrior c_init{2.0, 0.0625};
    LogNormalPrior sigma{0.0, 1.0};
    std::vector<double> ifr_means;
    // Zero fixes each IFR at its elicited mean instead of sampling it.
    double ifr_sd = 1e-4;

    bool ifr_point_mass() const noexcept { return ifr_sd == 0.0; }
    void validate(int ifr_segments) const;
};

// Daily cases split over four age groups, plus the reference IFR of each group.
struct AgeCaseMatrix {
    std::vector<std::array<double, 4>> counts;  // counts[t - 1] for day t
    std::array<double, 4> reference_ifr{};
};

// Per-day case-weighted IFR.
std::vector<double> daily_ifr(const AgeCaseMatrix& acm, int first_day, int last_day);

// Mean of the daily IFR over [l_b, l_{b+1} - 1] for each break segment.
std::vector<double> elicit_ifr(const AgeCaseMatrix& acm, const std::vector<int>& ifr_breaks);

}  // namespace epi
