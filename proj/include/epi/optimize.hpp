#pragma once

#include "epi/gradient.hpp"
#include "epi/target.hpp"

namespace epi {

struct AscentResult {
    Vector x;
    double log_density = 0.0;
    int iterations = 0;
    bool converged = false;
};

// L-BFGS ascent of the target's log density (Ceres line-search solver). Points where the
// density or gradient is undefined count as failed evaluations, so line searches back off.
AscentResult maximize(const Target& target, const GradientFn& grad, const Vector& start, int max_iterations = 200);

}  // namespace epi
