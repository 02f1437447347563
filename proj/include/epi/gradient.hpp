#pragma once

#include <functional>

#include "epi/errors.hpp"
#include "epi/target.hpp"

namespace epi {

class GradientError : public NumericalError {
public:
    GradientError(const std::string& what, int coordinate) : NumericalError(what), coordinate_(coordinate) {}
    int coordinate() const noexcept { return coordinate_; }

private:
    int coordinate_;
};

using ScalarFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;

// Central differences with step cbrt(eps) * max(1, |x_i|).
Vector finite_difference_gradient(const ScalarFn& f, const Vector& x);
Vector finite_difference_gradient(const Target& target, const Vector& x);

GradientFn finite_difference(const Target& target);

}  // namespace epi
