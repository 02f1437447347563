#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace epi {

enum class CourseLabel { natural, actual, scenario };
std::string to_string(CourseLabel label);

// A path on the S x I plane, in proportions of the population.
struct Trajectory {
    std::vector<double> time;
    std::vector<double> S;
    std::vector<double> I;
    CourseLabel label = CourseLabel::actual;

    std::size_t size() const noexcept { return S.size(); }
    void validate() const;
};

// Counts divided by N, on days 1..n.
Trajectory trajectory_from_counts(const std::vector<double>& S, const std::vector<double>& I, double N,
                                  CourseLabel label = CourseLabel::actual);

// dS/dt = -lambda S I / N, dI/dt = lambda S I / N - I / tau. On proportions N = 1.
struct SirField {
    double lambda = 0.0;
    double tau = 1.0;
    double N = 1.0;
};

struct SirState {
    double S = 0.0;
    double I = 0.0;
    double R = 0.0;
};

SirState sir_derivative(const SirField& field, const SirState& x);
SirState rk4_step(const SirField& field, const SirState& x, double dt);

// Classical RK4 from (S0, I0) over [0, horizon], recording every `record_every` steps
// (the endpoint is always recorded).
Trajectory natural_course(const SirField& field, double S0, double I0, double horizon, double dt,
                          int record_every = 1);

// Per-step displacement length; size() - 1 entries.
std::vector<double> speed_series(const Trajectory& traj);

// Sum of squared displacements between positions a and b (indices). a == b gives 0
// and sets `warning` when provided.
double work(const Trajectory& traj, std::size_t a, std::size_t b, std::string* warning = nullptr);

// Sum over a..b of the displacement between the courses relative to the natural position.
double effectiveness_L(const Trajectory& natural, const Trajectory& actual, std::size_t a, std::size_t b);

// Relative work reduction (W_natural - W_actual) / W_natural; empty when W_natural = 0.
std::optional<double> effectiveness_M(const Trajectory& natural, const Trajectory& actual, std::size_t a,
                                      std::size_t b);

struct DepartureRule {
    std::size_t window = 28;
    double t_threshold = -3.0;
    std::size_t run = 7;
};

struct ConservedQuantity {
    std::vector<double> q;
    std::vector<double> ergodic_mean;       // running mean of q
    std::optional<std::size_t> departure;   // index where a sustained negative trend starts
};

// Q_t = S_t + I_t - log(S_t) / (lambda_t tau). `rates` has one entry per trajectory point.
ConservedQuantity conserved_q(const Trajectory& traj, const std::vector<double>& rates, double tau,
                              const DepartureRule& rule = {});

// Squared difference between a reference Q and another model's Q at the same time.
double q_deviation(double q_reference, double q_other);

}  // namespace epi
