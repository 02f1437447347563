#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace epi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// An unnormalised log density on an unconstrained space. log_density may return
// -infinity; samplers treat that as a rejection.
class Target {
public:
    virtual ~Target() = default;

    virtual int dim() const = 0;
    virtual double log_density(const Vector& x) const = 0;

    virtual std::vector<std::string> names() const;
    // Maps an unconstrained point to natural parameter values.
    virtual Vector constrain(const Vector& x) const { return x; }
    // Log prior in unconstrained space, Jacobian included.
    virtual double log_prior(const Vector&) const { return 0.0; }
    // Number of observations that pointwise_loglik reports; zero if unsupported.
    virtual int observations() const { return 0; }
    virtual Vector pointwise_loglik(const Vector&) const { return {}; }
    // Starting point for a chain; the default jitters around the origin with sd 0.1.
    virtual Vector initial_point(std::mt19937_64& rng) const;
};

// Adapter for tests and toy models.
class FunctionTarget : public Target {
public:
    using Density = std::function<double(const Vector&)>;
    using Pointwise = std::function<Vector(const Vector&)>;

    FunctionTarget(int dim, Density density, Pointwise pointwise = {}, int observations = 0,
                   Density prior = {});

    int dim() const override { return dim_; }
    double log_density(const Vector& x) const override { return density_(x); }
    double log_prior(const Vector& x) const override { return prior_ ? prior_(x) : 0.0; }
    int observations() const override { return observations_; }
    Vector pointwise_loglik(const Vector& x) const override { return pointwise_ ? pointwise_(x) : Vector{}; }

private:
    int dim_;
    Density density_;
    Pointwise pointwise_;
    int observations_;
    Density prior_;
};

}  // namespace epi
