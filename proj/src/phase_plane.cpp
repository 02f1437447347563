#include "epi/phase_plane.hpp"

#include <cmath>

#include "epi/errors.hpp"

namespace epi {

std::string to_string(CourseLabel label) {
    switch (label) {
        case CourseLabel::natural: return "natural";
        case CourseLabel::actual: return "actual";
        case CourseLabel::scenario: return "scenario";
    }
    return "actual";
}

void Trajectory::validate() const {
    if (S.size() != I.size() || time.size() != S.size()) throw ParameterError("trajectory columns differ in length");
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (!std::isfinite(S[i]) || !std::isfinite(I[i]) || S[i] < 0.0 || I[i] < 0.0 || S[i] > 1.0 || I[i] > 1.0)
            throw RangeError("trajectory leaves the unit square at index " + std::to_string(i));
    }
}

Trajectory trajectory_from_counts(const std::vector<double>& S, const std::vector<double>& I, double N,
                                  CourseLabel label) {
    if (S.size() != I.size()) throw ParameterError("S and I differ in length");
    if (!(N > 0.0)) throw ParameterError("population must be positive");
    Trajectory t;
    t.label = label;
    for (std::size_t i = 0; i < S.size(); ++i) {
        t.time.push_back(static_cast<double>(i + 1));
        t.S.push_back(S[i] / N);
        t.I.push_back(I[i] / N);
    }
    return t;
}

SirState sir_derivative(const SirField& f, const SirState& x) {
    const double infection = f.lambda * x.S * x.I / f.N;
    const double removal = x.I / f.tau;
    return {-infection, infection - removal, removal};
}

SirState rk4_step(const SirField& f, const SirState& x, double dt) {
    auto axpy = [](const SirState& a, double s, const SirState& d) {
        return SirState{a.S + s * d.S, a.I + s * d.I, a.R + s * d.R};
    };
    const SirState k1 = sir_derivative(f, x);
    const SirState k2 = sir_derivative(f, axpy(x, 0.5 * dt, k1));
    const SirState k3 = sir_derivative(f, axpy(x, 0.5 * dt, k2));
    const SirState k4 = sir_derivative(f, axpy(x, dt, k3));
    return {x.S + dt / 6.0 * (k1.S + 2.0 * k2.S + 2.0 * k3.S + k4.S),
            x.I + dt / 6.0 * (k1.I + 2.0 * k2.I + 2.0 * k3.I + k4.I),
            x.R + dt / 6.0 * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R)};
}

Trajectory natural_course(const SirField& field, double S0, double I0, double horizon, double dt, int record_every) {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ParameterError("integration needs positive dt and horizon");
    if (!(field.lambda >= 0.0) || !(field.tau > 0.0) || !(field.N > 0.0))
        throw ParameterError("SIR field needs non-negative rate and positive tau, N");
    if (record_every < 1) throw ParameterError("record_every must be positive");
    constexpr double tol = 1e-9;
    auto inside = [&](double s, double i) { return s >= -tol && i >= -tol && s <= 1.0 + tol && i <= 1.0 + tol; };
    if (!inside(S0, I0)) throw RangeError("starting point outside the unit square");

    const auto steps = static_cast<long>(std::llround(horizon / dt));
    Trajectory traj;
    traj.label = CourseLabel::natural;
    SirState x{S0, I0, 0.0};
    traj.time.push_back(0.0);
    traj.S.push_back(x.S);
    traj.I.push_back(x.I);
    for (long k = 1; k <= steps; ++k) {
        x = rk4_step(field, x, dt);
        if (!inside(x.S, x.I) || !std::isfinite(x.S) || !std::isfinite(x.I))
            throw NumericalError("integration left the unit square at t = " + std::to_string(k * dt));
        if (k % record_every == 0 || k == steps) {
            traj.time.push_back(static_cast<double>(k) * dt);
            traj.S.push_back(x.S);
            traj.I.push_back(x.I);
        }
    }
    return traj;
}

std::vector<double> speed_series(const Trajectory& traj) {
    if (traj.size() < 2) throw ParameterError("speed needs at least two points");
    std::vector<double> v(traj.size() - 1);
    for (std::size_t t = 0; t + 1 < traj.size(); ++t)
        v[t] = std::hypot(traj.S[t + 1] - traj.S[t], traj.I[t + 1] - traj.I[t]);
    return v;
}

double work(const Trajectory& traj, std::size_t a, std::size_t b, std::string* warning) {
    if (a > b || b >= traj.size()) throw RangeError("work interval outside the trajectory");
    if (a == b) {
        if (warning) *warning = "degenerate work interval: a == b";
        return 0.0;
    }
    double w = 0.0;
    for (std::size_t t = a; t < b; ++t) {
        const double ds = traj.S[t + 1] - traj.S[t];
        const double di = traj.I[t + 1] - traj.I[t];
        w += ds * ds + di * di;
    }
    return w;
}

namespace {
void check_pair(const Trajectory& natural, const Trajectory& actual, std::size_t a, std::size_t b) {
    if (a > b || b >= natural.size() || b >= actual.size()) throw RangeError("interval outside the trajectories");
    for (std::size_t t = a; t <= b; ++t) {
        if (t < natural.time.size() && t < actual.time.size() && natural.time[t] != actual.time[t])
            throw ParameterError("courses are not on the same time grid");
    }
}
}  // namespace

double effectiveness_L(const Trajectory& natural, const Trajectory& actual, std::size_t a, std::size_t b) {
    check_pair(natural, actual, a, b);
    double L = 0.0;
    for (std::size_t t = a; t <= b; ++t) {
        const double norm2 = natural.S[t] * natural.S[t] + natural.I[t] * natural.I[t];
        if (!(norm2 > 0.0)) throw NumericalError("natural course at the origin at index " + std::to_string(t));
        const double ds = natural.S[t] - actual.S[t];
        const double di = natural.I[t] - actual.I[t];
        L += std::sqrt((ds * ds + di * di) / norm2);
    }
    return L;
}

std::optional<double> effectiveness_M(const Trajectory& natural, const Trajectory& actual, std::size_t a,
                                      std::size_t b) {
    check_pair(natural, actual, a, b);
    const double wn = work(natural, a, b);
    if (!(wn > 0.0)) return std::nullopt;
    return (wn - work(actual, a, b)) / wn;
}

ConservedQuantity conserved_q(const Trajectory& traj, const std::vector<double>& rates, double tau,
                              const DepartureRule& rule) {
    if (rates.size() != traj.size()) throw ParameterError("need one rate per trajectory point");
    if (!(tau > 0.0)) throw ParameterError("tau must be positive");
    ConservedQuantity out;
    double running = 0.0;
    for (std::size_t t = 0; t < traj.size(); ++t) {
        if (!(traj.S[t] > 0.0)) throw RangeError("Q needs S > 0; S = 0 at index " + std::to_string(t));
        if (!(rates[t] > 0.0)) throw ParameterError("Q needs a positive rate at index " + std::to_string(t));
        const double q = traj.S[t] + traj.I[t] - std::log(traj.S[t]) / (rates[t] * tau);
        out.q.push_back(q);
        running += q;
        out.ergodic_mean.push_back(running / static_cast<double>(t + 1));
    }

    // Trailing-window OLS slope against time.
    const std::size_t w = rule.window;
    std::size_t streak = 0;
    if (w >= 3) {
        for (std::size_t end = w - 1; end < out.q.size(); ++end) {
            const std::size_t start = end + 1 - w;
            double tbar = 0.0, qbar = 0.0;
            for (std::size_t i = start; i <= end; ++i) {
                tbar += traj.time[i];
                qbar += out.q[i];
            }
            tbar /= static_cast<double>(w);
            qbar /= static_cast<double>(w);
            double stt = 0.0, stq = 0.0;
            for (std::size_t i = start; i <= end; ++i) {
                stt += (traj.time[i] - tbar) * (traj.time[i] - tbar);
                stq += (traj.time[i] - tbar) * (out.q[i] - qbar);
            }
            const double slope = stq / stt;
            double ssr = 0.0;
            for (std::size_t i = start; i <= end; ++i) {
                const double r = out.q[i] - qbar - slope * (traj.time[i] - tbar);
                ssr += r * r;
            }
            const double se = std::sqrt(ssr / static_cast<double>(w - 2) / stt);
            const double tstat = se > 0.0 ? slope / se : (slope < 0.0 ? -INFINITY : 0.0);
            if (slope < 0.0 && tstat < rule.t_threshold) {
                if (++streak == rule.run) {
                    out.departure = end + 1 - rule.run;
                    break;
                }
            } else {
                streak = 0;
            }
        }
    }
    return out;
}

double q_deviation(double q_reference, double q_other) {
    const double d = q_other - q_reference;
    return d * d;
}

}  // namespace epi
