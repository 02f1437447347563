#include "epi/target.hpp"

namespace epi {

std::vector<std::string> Target::names() const {
    std::vector<std::string> out;
    for (int i = 0; i < dim(); ++i) out.push_back("x" + std::to_string(i + 1));
    return out;
}

Vector Target::initial_point(std::mt19937_64& rng) const {
    std::normal_distribution<double> jitter(0.0, 0.1);
    Vector x(dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = jitter(rng);
    return x;
}

FunctionTarget::FunctionTarget(int dim, Density density, Pointwise pointwise, int observations, Density prior)
    : dim_(dim), density_(std::move(density)), pointwise_(std::move(pointwise)), observations_(observations),
      prior_(std::move(prior)) {}

}  // namespace epi
