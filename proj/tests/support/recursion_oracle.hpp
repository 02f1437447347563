#pragma once

// Straight-line restatement of the discrete SEIR recursions, kept free of any
// library helper so it can serve as an oracle for simulate_paths.

#include <cmath>
#include <vector>

namespace oracle {

struct Instance {
    int n = 0;
    double N = 0.0;
    int tau = 6;
    int h = 0;  // already zero for SIR
    int t_star = 84;
    double a1 = 0.4, a2 = 0.1, A = 0.0;
    bool vacc = false, dem = false, seirs = false;
    std::vector<int> u;         // change-points
    std::vector<double> lam;    // one per segment
    std::vector<int> l;         // IFR breaks
    std::vector<double> p;      // one per IFR segment
    double c_init = 1.0;
    std::vector<double> rho;    // rho[t], t = 1..n (index 0 unused)
    std::vector<double> death;  // death[s], s = 1..n-1 (index 0 unused)
    std::vector<double> recov;  // recov[s]
};

struct Paths {
    std::vector<double> C, S, I, R, theta, Rt;  // 1-based, index 0 unused
    bool ok = true;
};

inline double lambda(const Instance& x, int t) {
    for (std::size_t j = 0; j + 1 < x.u.size(); ++j)
        if (t >= x.u[j] && t < x.u[j + 1]) return x.lam[j];
    return x.lam.back();
}

inline double ifr(const Instance& x, int t) {
    if (t < x.l.front()) return x.p.front();
    for (std::size_t b = 0; b + 1 < x.l.size(); ++b)
        if (t >= x.l[b] && t < x.l[b + 1]) return x.p[b];
    return x.p.back();
}

inline double pmf(const std::vector<double>& m, int s) {
    return (s >= 1 && s < static_cast<int>(m.size())) ? m[s] : 0.0;
}

inline Paths run(const Instance& x) {
    const int n = x.n;
    Paths o;
    o.C.assign(n + 1, 0.0);
    o.S.assign(n + 1, 0.0);
    o.I.assign(n + 1, 0.0);
    o.R.assign(n + 1, 0.0);
    o.theta.assign(n + 1, 0.0);
    o.Rt.assign(n + 1, 0.0);
    const int h = x.h;
    const int last = n - h - 2;
    for (int t = 1; t <= n && t <= x.tau + h; ++t) o.C[t] = x.c_init;
    o.S[1] = x.N - x.c_init;
    o.I[1] = x.c_init;
    o.R[1] = 0.0;
    const double A = x.dem ? x.A : 0.0;

    for (int t = 2; t <= n; ++t) {
        if (t > x.tau + h && t < n) {
            const int s = t - 1 - h;
            o.C[t] = lambda(x, s) * o.S[s] * o.I[s] / x.N;
        } else if (t == n && t > x.tau + h) {
            o.C[t] = o.C[t - 1];
        }
        if (t < x.tau || t > last) {
            o.S[t] = o.S[t - 1];
            o.I[t] = o.I[t - 1];
            o.R[t] = o.R[t - 1];
        } else {
            double V = 0.0;
            if (x.vacc) {
                if (t >= 15 && t - 14 <= n) V += x.a1 * x.rho[t - 14];
                if (t >= 36 && t - 35 <= n) V += x.a2 * x.rho[t - 35];
            }
            double back = 0.0;
            const int r = t - x.t_star;
            if (x.seirs && r >= 2) {
                double conv = 0.0;
                for (int k = 1; k < r; ++k) conv += pmf(x.recov, r - k) * o.C[k];
                back = (1.0 - ifr(x, r)) * conv;
            }
            o.S[t] = o.S[t - 1] - o.C[t] - V + A - A * o.S[t - 1] / x.N + back;
            double active = 0.0;
            for (int k = t - x.tau + 1; k <= t; ++k)
                if (k >= 1) active += o.C[k];
            o.I[t] = active - A * o.I[t - 1] / x.N;
            double removed = 0.0;
            for (int k = 1; k <= t - x.tau; ++k) removed += o.C[k];
            o.R[t] = removed + V - A * o.R[t - 1] / x.N;
        }
        if (o.C[t] < 0.0 || o.S[t] < 0.0 || o.I[t] < 0.0 || o.S[t] > x.N * (1.0 + 1e-12)) o.ok = false;
    }
    for (int t = 2; t <= n; ++t) {
        double acc = 0.0;
        for (int k = 1; k < t; ++k) acc += pmf(x.death, t - k) * o.C[k];
        o.theta[t] = ifr(x, t) * acc;
    }
    for (int t = 1; t <= n; ++t) o.Rt[t] = lambda(x, t) * x.tau * o.S[t] / x.N;
    return o;
}

}  // namespace oracle
