#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "epi/dataset.hpp"
#include "epi/model.hpp"

namespace epi {

struct SyntheticOptions {
    Date start = Date{std::chrono::year{2020} / 3 / 1};
    double reporting = 1.0;  // probability an infection is recorded as a case
    std::optional<std::array<double, 4>> age_shares;
};

struct TruthRecord {
    ParamVector params;
    LatentPaths paths;
    std::uint64_t seed = 0;
    double reporting = 1.0;
};

struct SyntheticData {
    Dataset data;
    TruthRecord truth;
};

// One death count around theta under the configured observation model; theta <= 0
// gives 0 without touching the generator. An infinite psi gives plain Poisson draws.
double draw_deaths(double theta, const ParamVector& params, Likelihood likelihood, std::mt19937_64& rng);

// Deaths use stream 0 of `seed`, recorded cases stream 1; both are drawn for t = 1..n.
SyntheticData generate_synthetic(const ModelConfig& config, const ParamVector& params, const std::vector<double>& rho,
                                 std::uint64_t seed, const SyntheticOptions& options = {});

}  // namespace epi
