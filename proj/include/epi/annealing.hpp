#pragma once

#include <cstdint>
#include <vector>

#include "epi/target.hpp"

namespace epi {

// Geometric cooling from initial to final temperature over `steps` proposals.
// Both temperatures zero gives a greedy search that only takes non-worsening moves.
struct AnnealingSchedule {
    double initial_temperature = 1.0;
    double final_temperature = 1e-6;
    int steps = 100000;
    // Random-walk sd at the initial temperature; shrinks with sqrt(T / T0) down to
    // proposal_scale * min_scale_fraction.
    double proposal_scale = 0.5;
    double min_scale_fraction = 1e-3;
    std::uint64_t seed = 1;

    double temperature(int step) const;
    void validate() const;
};

struct AnnealingResult {
    Vector best;
    double best_value = 0.0;
    Vector last;
    double last_value = 0.0;
    int accepted = 0;
    std::vector<double> trace;  // current value after each step
};

AnnealingResult simulated_annealing(const Target& target, const Vector& init, const AnnealingSchedule& schedule);

}  // namespace epi
