#include "epi/optimize.hpp"

#include <cmath>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

namespace epi {

namespace {

class NegativeLogDensity : public ceres::FirstOrderFunction {
public:
    NegativeLogDensity(const Target& target, const GradientFn& grad) : target_(target), grad_(grad) {}

    bool Evaluate(const double* x, double* cost, double* gradient) const override {
        const Vector q = Eigen::Map<const Vector>(x, target_.dim());
        const double lp = target_.log_density(q);
        if (!std::isfinite(lp)) return false;
        *cost = -lp;
        if (gradient) {
            Vector g;
            try {
                g = grad_(q);
            } catch (const GradientError&) {
                return false;
            }
            if (!g.allFinite()) return false;
            Eigen::Map<Vector>(gradient, target_.dim()) = -g;
        }
        return true;
    }

    int NumParameters() const override { return target_.dim(); }

private:
    const Target& target_;
    const GradientFn& grad_;
};

}  // namespace

AscentResult maximize(const Target& target, const GradientFn& grad, const Vector& start, int max_iterations) {
    AscentResult out;
    out.x = start;
    if (!std::isfinite(target.log_density(start))) throw ParameterError("ascent needs a finite starting density");

    ceres::GradientProblem problem(new NegativeLogDensity(target, grad));
    ceres::GradientProblemSolver::Options options;
    options.max_num_iterations = max_iterations;
    options.logging_type = ceres::SILENT;
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, out.x.data(), &summary);

    out.log_density = target.log_density(out.x);
    if (!std::isfinite(out.log_density)) {
        out.x = start;
        out.log_density = target.log_density(start);
    }
    out.iterations = static_cast<int>(summary.iterations.size());
    out.converged = summary.termination_type == ceres::CONVERGENCE;
    return out;
}

}  // namespace epi
