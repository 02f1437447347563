// Acceptance criteria runner. With no arguments every criterion runs; otherwise only
// the listed numbers. Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "epi/bridge.hpp"
#include "epi/config.hpp"
#include "epi/criteria.hpp"
#include "epi/diagnostics.hpp"
#include "epi/endemicity.hpp"
#include "epi/hmc.hpp"
#include "epi/model.hpp"
#include "epi/observation.hpp"
#include "epi/phase_plane.hpp"
#include "epi/pipeline.hpp"
#include "epi/posterior.hpp"
#include "epi/synthetic.hpp"
#include "support/conjugate.hpp"
#include "support/model_cases.hpp"
#include "support/wls_oracle.hpp"

using namespace epi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome recursion_oracle() {
    Clock clock;
    std::mt19937_64 rng(1);
    int compared = 0, attempts = 0;
    double worst = 0.0;
    bool all_agree = true;
    std::set<int> combos;
    while (compared < 100 && attempts < 1000) {
        const int combo = attempts % 16;
        ++attempts;
        const auto rc = oracle::random_case(rng, combo);
        const auto got = simulate_paths(rc.params, rc.config, rc.rho);
        const auto want = oracle::run(oracle::to_instance(rc.config, rc.params, rc.rho));
        const double err = oracle::max_path_error(got, want, rc.config.n);
        if (err < 0.0) all_agree = false;
        if (!want.ok) continue;
        worst = std::max(worst, err);
        combos.insert(combo);
        ++compared;
    }
    const double secs = clock.seconds();
    return {compared == 100 && all_agree && worst <= 1e-12 && combos.size() == 16 && secs < 5.0,
            std::to_string(compared) + " feasible instances over " + std::to_string(combos.size()) +
                " flag combinations, max rel error " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome observation_identities() {
    int mismatches = 0;
    for (int d = 0; d <= 20; ++d)
        for (double mu : {0.1, 1.0, 10.0})
            if (mixture_loglik(d, mu, MixtureVariant::poisson_exp) != negbin_logpmf(d, mu, 1.0)) ++mismatches;

    // The exact gap is about ((d - mu)^2 - d) / (2 psi), so the grid keeps that below 1e-6.
    double poisson_gap = 0.0;
    for (int d = 0; d <= 10; ++d)
        for (double mu : {0.5, 2.0, 5.0})
            poisson_gap = std::max(poisson_gap, std::fabs(negbin_logpmf(d, mu, 1e8) - poisson_logpmf(d, mu)));

    double norm_gap = 0.0;
    for (double theta : {0.5, 5.0, 50.0})
        for (double psi : {0.5, 2.0, 100.0}) {
            double total = 0.0;
            for (int d = 0; d <= 20000; ++d) total += std::exp(negbin_logpmf(d, theta, psi));
            norm_gap = std::max(norm_gap, std::fabs(total - 1.0));
        }
    return {mismatches == 0 && poisson_gap <= 1e-6 && norm_gap <= 1e-10,
            std::to_string(mismatches) + " mismatches on the 21x3 grid, Poisson gap " + fmt("%.2e", poisson_gap) +
                ", normalisation gap " + fmt("%.2e", norm_gap)};
}

Outcome sampler_calibration() {
    Clock clock;
    const FunctionTarget target(5, [](const Vector& x) { return -0.5 * x.squaredNorm(); });
    SamplerConfig cfg;
    cfg.seed = 4;
    const auto chains = run_chains(target, cfg, 4);
    const auto diag = diagnostics(chains);
    const auto all = merge_chains(chains);
    bool ok = all.draws.rows() == 4000;
    double worst_z = 0.0, worst_sd = 0.0, worst_rhat = 0.0;
    for (int i = 0; i < 5; ++i) {
        const auto& d = diag[static_cast<std::size_t>(i)];
        if (!d.defined()) return {false, "diagnostics undefined"};
        const auto col = all.draws.col(i);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
        worst_z = std::max(worst_z, std::fabs(mean) / (sd / std::sqrt(*d.ess_bulk)));
        worst_sd = std::max(worst_sd, std::fabs(sd - 1.0));
        worst_rhat = std::max(worst_rhat, *d.rhat);
    }
    const double secs = clock.seconds();
    ok = ok && worst_z < 3.0 && worst_sd < 0.05 && worst_rhat < 1.01 && secs < 60.0;
    return {ok, "max |mean|/(sd/sqrt(ESS)) " + fmt("%.2f", worst_z) + ", max |sd-1| " + fmt("%.4f", worst_sd) +
                    ", max Rhat " + fmt("%.4f", worst_rhat) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome parameter_recovery() {
    const std::vector<double> truth{0.9, 0.4, 0.7};
    ModelConfig model;
    model.n = 150;
    model.N = 1e7;
    model.changepoints = {1, 15, 100, 147};
    model.ifr_breaks = {1, 151};
    model.likelihood = Likelihood::negbin;
    model.death_delay = discretize_delay(DelaySpec::infection_to_death_default(), model.n);
    ParamVector params;
    params.lambdas = truth;
    params.ifrs = {0.01};
    params.psi = 10.0;
    params.c_init = 5.0;
    PriorSpec priors;
    priors.ifr_means = {0.01};

    SamplerConfig sampler;
    sampler.warmup = 500;
    sampler.samples = 500;
    constexpr int kReps = 20, kChains = 2;
    std::vector<int> covered(truth.size(), 0);
    double slowest = 0.0, worst_rhat = 0.0;
    for (int rep = 1; rep <= kReps; ++rep) {
        Clock clock;
        const auto data = generate_synthetic(model, params, {}, 1000 + static_cast<std::uint64_t>(rep));
        const EpidemicPosterior post(model, priors, data.data.deaths);
        sampler.seed = static_cast<std::uint64_t>(rep);
        const auto chains = run_chains(post, post.gradient_fn(), sampler, kChains);
        slowest = std::max(slowest, clock.seconds());
        const auto diag = diagnostics(chains);
        const auto all = merge_chains(chains);
        std::string line = "  replication " + std::to_string(rep) + ":";
        for (std::size_t j = 0; j < truth.size(); ++j) {
            const auto col = all.constrained.col(static_cast<Eigen::Index>(j));
            std::vector<double> v(col.begin(), col.end());
            std::sort(v.begin(), v.end());
            const double lo = v[static_cast<std::size_t>(0.025 * (v.size() - 1))];
            const double hi = v[static_cast<std::size_t>(std::ceil(0.975 * (v.size() - 1)))];
            const bool in = lo <= truth[j] && truth[j] <= hi;
            covered[j] += in ? 1 : 0;
            line += " lambda_" + std::to_string(j + 1) + " [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "]" +
                    (in ? "" : " miss");
            if (diag[j].rhat) worst_rhat = std::max(worst_rhat, *diag[j].rhat);
        }
        std::cout << line << "\n" << std::flush;
    }
    const int least = *std::min_element(covered.begin(), covered.end());
    return {least >= 17 && slowest < 600.0,
            "coverage " + std::to_string(covered[0]) + "/" + std::to_string(covered[1]) + "/" +
                std::to_string(covered[2]) + " of " + std::to_string(kReps) + ", slowest fit " + fmt("%.1f", slowest) +
                " s, max Rhat " + fmt("%.3f", worst_rhat)};
}

Outcome evidence_oracle() {
    Clock clock;
    const auto model = oracle::make_normal_mean(25, 1.1, 12);
    const auto target = model.target();
    SamplerConfig cfg;
    cfg.seed = 3;
    const auto chains = run_chains(target, cfg, 4);
    const auto a = bridge_log_ml(chains, target);
    cfg.seed = 4;
    BridgeOptions other;
    other.seed = 9;
    const auto b = bridge_log_ml(run_chains(target, cfg, 4), target, other);
    const double gap = std::fabs(a.log_ml - model.log_evidence());
    const auto bf = bayes_factor(a, b);
    const double secs = clock.seconds();
    return {a.converged && b.converged && gap < 0.05 && std::fabs(bf.value) <= 2.0 * bf.error && secs < 30.0,
            "|log ml - exact| " + fmt("%.4f", gap) + ", self log BF " + fmt("%.4f", bf.value) + " (error " +
                fmt("%.4f", bf.error) + "), " + fmt("%.1f", secs) + " s"};
}

Outcome criteria_oracles() {
    const Matrix constant = Matrix::Constant(200, 15, -1.3);
    const auto s = information_criteria(constant, -1.3 * 15, 2);

    const auto model = oracle::make_normal_mean(20, 0.7, 5);
    const auto target = model.target();
    SamplerConfig cfg;
    cfg.seed = 6;
    const auto merged = merge_chains(run_chains(target, cfg, 4));
    const auto [lppd, p] = waic_terms(merged.loglik);
    const auto [b_lppd, b_p] = model.waic_brute_force(1000000, 7);
    const bool ok = s.p_dic2 == 0.0 && std::fabs(lppd - b_lppd) < 0.1 && std::fabs(p - b_p) < 0.1;
    return {ok, "p_DIC2 " + fmt("%g", s.p_dic2) + ", lppd gap " + fmt("%.4f", std::fabs(lppd - b_lppd)) +
                    ", p_WAIC gap " + fmt("%.4f", std::fabs(p - b_p))};
}

Outcome phase_conservation() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_drift = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        const double lambda = 0.1 + 0.9 * u(rng);
        const double tau = 2.0 + 10.0 * u(rng);
        const double S0 = 0.3 + 0.69 * u(rng);
        const double I0 = (1.0 - S0) * (0.01 + 0.98 * u(rng));
        const auto tr = natural_course({lambda, tau}, S0, I0, 100.0, 0.001, 100);
        const auto q = conserved_q(tr, std::vector<double>(tr.size(), lambda), tau);
        for (double v : q.q) worst_drift = std::max(worst_drift, std::fabs(v - q.q.front()) / std::fabs(q.q.front()));
    }
    double worst_decay = 0.0;
    for (double tau : {2.0, 6.0, 10.0}) {
        const auto tr = natural_course({0.0, tau}, 0.6, 0.2, tau, 0.001);
        worst_decay = std::max(worst_decay, std::fabs(tr.I.back() / 0.2 - std::exp(-1.0)));
    }
    return {worst_drift < 1e-7 && worst_decay < 1e-8,
            "max relative Q drift " + fmt("%.2e", worst_drift) + ", decay error " + fmt("%.2e", worst_decay)};
}

Trajectory course(const std::vector<double>& S, const std::vector<double>& I, CourseLabel label) {
    Trajectory t;
    t.S = S;
    t.I = I;
    for (std::size_t i = 0; i < S.size(); ++i) t.time.push_back(static_cast<double>(i + 1));
    t.label = label;
    return t;
}

Outcome effectiveness_measures() {
    const auto nat = natural_course({0.4, 6.0}, 0.95, 0.05, 30.0, 0.5, 2);
    const std::size_t last = nat.size() - 1;
    const double L0 = effectiveness_L(nat, nat, 0, last);
    const auto M0 = effectiveness_M(nat, nat, 0, last);

    // Two equal natural steps against one step and a standstill.
    const auto two = course({0.5, 0.375, 0.25}, {0.25, 0.25, 0.25}, CourseLabel::natural);
    const auto one = course({0.5, 0.375, 0.375}, {0.25, 0.25, 0.25}, CourseLabel::actual);
    const auto half = effectiveness_M(two, one, 0, 2);

    // Natural positions on the unit circle; the actual course sits delta closer to the origin.
    const double delta = 0.03;
    std::vector<double> S, I, S2, I2;
    for (int t = 0; t < 20; ++t) {
        const double a = 0.05 * t;
        S.push_back(std::cos(a));
        I.push_back(std::sin(a));
        S2.push_back((1.0 - delta) * std::cos(a));
        I2.push_back((1.0 - delta) * std::sin(a));
    }
    const double L = effectiveness_L(course(S, I, CourseLabel::natural), course(S2, I2, CourseLabel::actual), 3, 17);
    const double L_exact = 15 * delta;
    const bool ok = L0 == 0.0 && M0 && *M0 == 0.0 && half && *half == 0.5 && std::fabs(L - L_exact) < 1e-12;
    return {ok, "L identical " + fmt("%g", L0) + ", M identical " + fmt("%g", M0 ? *M0 : NAN) + ", M half-work " +
                    fmt("%.17g", half ? *half : NAN) + ", shifted L " + fmt("%.15f", L) + " vs " + fmt("%.15f", L_exact)};
}

RunConfig smoke_config(const fs::path& out) {
    RunConfig cfg = load_run_config(std::string(EPI_SOURCE_DIR) + "/configs/smoke.json");
    cfg.output_dir = out.string();
    cfg.omit_timing = true;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool run(const RunConfig& cfg, Command c, std::string& error) {
    const auto r = run_pipeline(cfg, c, "epifit " + to_string(c) + " --config configs/smoke.json --omit-timing");
    if (r.status != 0) error = to_string(c) + ": " + r.error;
    return r.status == 0;
}

Outcome cut_feedback() {
    const fs::path root = fs::path(EPI_BINARY_DIR) / "acceptance" / "cut";
    fs::remove_all(root);
    const auto with = smoke_config(root / "with");
    const auto without = smoke_config(root / "without");
    std::string err;
    if (!run(with, Command::simulate, err) || !run(with, Command::fit, err)) return {false, err};
    const fs::path draws = fs::path(with.output_dir) / "fit" / "draws.csv";
    const std::string before = slurp(draws);
    if (!run(with, Command::smooth_proportion, err)) return {false, err};
    const std::string after = slurp(draws);
    if (!run(without, Command::simulate, err) || !run(without, Command::fit, err)) return {false, err};
    const std::string alone = slurp(fs::path(without.output_dir) / "fit" / "draws.csv");
    const auto h = [](const std::string& s) { return std::hash<std::string>{}(s); };
    const bool same = before == after && before == alone && !before.empty();

    // proportion.csv: date,t,median,smoothed,excluded
    std::ifstream in(fs::path(with.output_dir) / "proportion.csv");
    std::vector<double> x, y, t_all, smoothed;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#' || line.rfind("date", 0) == 0) continue;
        std::stringstream ss(line);
        std::vector<std::string> f;
        for (std::string s; std::getline(ss, s, ',');) f.push_back(s);
        const double t = std::stod(f[1]);
        t_all.push_back(t);
        smoothed.push_back(std::stod(f[3]));
        if (f[2] != "NA") {
            x.push_back(t);
            y.push_back(std::stod(f[2]));
        }
    }
    double worst = smoothed.empty() ? INFINITY : 0.0;
    for (std::size_t i = 0; i < t_all.size(); ++i)
        worst = std::max(worst, std::fabs(smoothed[i] - oracle::wls_local_linear(x, y, t_all[i], with.span)));
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016zx", h(before));
    return {same && worst < 1e-8, std::string("draw file hash ") + hash + (same ? " identical" : " differs") +
                                      " across with/without stage 2, max loess vs WLS gap " + fmt("%.2e", worst)};
}

std::vector<std::pair<std::string, std::string>> tree(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
    std::sort(out.begin(), out.end());
    return out;
}

Outcome endemicity_detector() {
    const int draws = 400, days = 100;
    const double tau = 6.0, N = 1e6;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix rates(draws, days), sus(draws, days);
    for (int s = 0; s < draws; ++s)
        for (int t = 1; t <= days; ++t) {
            const double common = z(rng);
            const double sign = t < 50 ? 1.0 : -1.0;
            rates(s, t - 1) = 0.3 + 0.02 * (sign * common + 0.3 * z(rng));
            sus(s, t - 1) = N / tau * (0.5 + 0.05 * common);
        }
    const auto d = endemicity_diagnostic(rates, sus, tau, N);
    return {d.first_negative_day && *d.first_negative_day == 50,
            d.first_negative_day ? "first negative covariance on day " + std::to_string(*d.first_negative_day)
                                 : std::string("no negative covariance")};
}

Outcome end_to_end() {
    Clock clock;
    const fs::path root = fs::path(EPI_BINARY_DIR) / "acceptance" / "smoke";
    fs::remove_all(root);
    std::string err;
    const Command steps[] = {Command::simulate, Command::fit, Command::select, Command::phase};
    for (const char* name : {"a", "b"}) {
        const auto cfg = smoke_config(root / name);
        if (cfg.selection.variants.size() < 2) return {false, "smoke config selects fewer than two variants"};
        for (Command c : steps)
            if (!run(cfg, c, err)) return {false, err};
    }
    const auto a = tree(root / "a"), b = tree(root / "b");
    const bool same = !a.empty() && a == b;
    const double secs = clock.seconds();
    return {same && secs < 900.0, std::to_string(a.size()) + " artifacts, " +
                                      (same ? "byte-identical" : "differing") + " across two runs, " +
                                      fmt("%.1f", secs) + " s for both"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"recursion oracle", recursion_oracle},
        {"observation-model identities", observation_identities},
        {"sampler calibration", sampler_calibration},
        {"synthetic parameter recovery", parameter_recovery},
        {"evidence oracle", evidence_oracle},
        {"criteria oracles", criteria_oracles},
        {"phase-plane conservation", phase_conservation},
        {"effectiveness measures", effectiveness_measures},
        {"cut-feedback integrity", cut_feedback},
        {"endemicity detector", endemicity_detector},
        {"end-to-end smoke", end_to_end},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!wanted.empty() && !wanted.count(id)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[k].first << ": " << o.detail << "\n"
                  << std::flush;
    }
    return failed;
}
