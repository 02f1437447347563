#include "epi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epi/bridge.hpp"
#include "epi/diagnostics.hpp"
#include "epi/errors.hpp"
#include "epi/phase_plane.hpp"
#include "epi/proportion.hpp"
#include "epi/synthetic.hpp"
#include "json.hpp"

namespace epi {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFitDir = "fit";
constexpr const char* kDrawsFile = "draws.csv";

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void csv_header(std::ofstream& out, const std::string& what, const std::string& units, const std::string& invocation) {
    out << "# contents: " << what << "\n# units: " << units << "\n# command: " << invocation << "\n";
}

ordered_json meta(const std::string& invocation, const std::string& units) {
    return ordered_json{{"command", invocation}, {"units", units}};
}

void write_json(const fs::path& path, const ordered_json& j) {
    auto out = open_output(path);
    out << j.dump(2) << "\n";
}

ordered_json optional_number(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? ordered_json(*v) : ordered_json(nullptr);
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> column(const std::vector<ChainDraws>& chains, Eigen::Index j) {
    std::vector<double> v;
    for (const auto& c : chains)
        for (Eigen::Index i = 0; i < c.size(); ++i) v.push_back(c.constrained(i, j));
    return v;
}

std::string hex64(std::uint64_t x) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

ordered_json fit_summary(const FitOutput& fit, const RunConfig& cfg, const std::string& invocation) {
    ordered_json j;
    j["meta"] = meta(invocation, "rates per day; counts in persons; wall time in seconds");
    j["model"] = fit.variant;
    j["likelihood"] = to_string(fit.model.likelihood);
    j["days"] = fit.model.n;
    j["changepoints"] = fit.model.changepoints;
    j["ifr_breaks"] = fit.model.ifr_breaks;
    j["ifr_means"] = fit.priors.ifr_means;
    j["seed"] = cfg.seed;
    j["draw_hash"] = hex64(hash_draws(fit.chains));

    ordered_json chains = ordered_json::array();
    int total_div = 0;
    for (const auto& c : fit.chains) {
        ordered_json cj{{"chain", c.chain},
                        {"seed", c.seed},
                        {"draws", c.size()},
                        {"acceptance", c.acceptance},
                        {"divergences", c.divergences},
                        {"warmup_divergences", c.adaptation.warmup_divergences},
                        {"step_size", c.adaptation.step_size},
                        {"mean_leapfrog", c.mean_leapfrog}};
        if (!cfg.omit_timing) cj["wall_seconds"] = c.wall_seconds;
        total_div += c.divergences;
        chains.push_back(cj);
    }
    j["chains"] = chains;
    j["divergences"] = total_div;

    std::vector<ParameterDiagnostics> diag;
    if (fit.chains.size() >= 2) diag = diagnostics(fit.chains);
    ordered_json params = ordered_json::array();
    const auto& names = fit.chains.front().names;
    for (std::size_t p = 0; p < names.size(); ++p) {
        const auto v = column(fit.chains, static_cast<Eigen::Index>(p));
        double mean = 0.0, var = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(std::max<std::size_t>(1, v.size() - 1));
        ordered_json pj{{"name", names[p]},    {"mean", mean},
                        {"sd", std::sqrt(var)}, {"q2.5", quantile(v, 0.025)},
                        {"median", quantile(v, 0.5)}, {"q97.5", quantile(v, 0.975)}};
        if (!diag.empty()) {
            pj["rhat"] = optional_number(diag[p].rhat);
            pj["ess_bulk"] = optional_number(diag[p].ess_bulk);
            pj["ess_tail"] = optional_number(diag[p].ess_tail);
        } else {
            pj["rhat"] = nullptr;
            pj["ess_bulk"] = nullptr;
            pj["ess_tail"] = nullptr;
        }
        params.push_back(pj);
    }
    j["parameters"] = params;
    if (!cfg.omit_timing) j["wall_seconds"] = fit.wall_seconds;
    return j;
}

std::vector<std::string> write_fit(const FitOutput& fit, const RunConfig& cfg, const fs::path& dir,
                                   const std::string& invocation) {
    const auto draws = dir / kDrawsFile;
    const auto summary = dir / "summary.json";
    write_draws_csv(draws.string(), fit.chains, invocation);
    write_json(summary, fit_summary(fit, cfg, invocation));
    return {draws.string(), summary.string()};
}

// Posterior median of each column of the fit's draw table.
ParamVector median_params(const DrawTable& table, const PriorSpec& priors) {
    Vector med(table.values.cols());
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
        std::vector<double> v(table.values.rows());
        for (Eigen::Index i = 0; i < table.values.rows(); ++i) v[static_cast<std::size_t>(i)] = table.values(i, j);
        med[j] = quantile(std::move(v), 0.5);
    }
    return params_from_row(table.names, med, priors);
}

// Infection rate for every day, carrying the last segment forward.
std::vector<double> daily_rates(const ParamVector& params, const ModelConfig& model) {
    std::vector<double> r;
    const int last = model.changepoints.back() - 1;
    for (int t = 1; t <= model.n; ++t) r.push_back(lambda_at(std::min(t, last), params.lambdas, model.changepoints));
    return r;
}

Trajectory slice(const Trajectory& tr, int a, int b) {
    Trajectory out;
    out.label = tr.label;
    for (int t = a; t <= b; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        out.time.push_back(static_cast<double>(t));
        out.S.push_back(tr.S[i]);
        out.I.push_back(tr.I[i]);
    }
    return out;
}

void write_trajectory_rows(std::ofstream& out, const Trajectory& tr, const std::vector<double>& q,
                           const Dataset& data) {
    const auto v = speed_series(tr);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const int day = static_cast<int>(std::lround(tr.time[i]));
        out << to_string(tr.label) << "," << format_date(data.dates[static_cast<std::size_t>(day - 1)]) << "," << day
            << "," << format_number(tr.S[i]) << "," << format_number(tr.I[i]) << ","
            << (i < v.size() ? format_number(v[i]) : std::string()) << "," << format_number(q[i]) << "\n";
    }
}

ordered_json comparison(const Trajectory& reference, const Trajectory& other, const std::string& ref_name,
                        const std::string& other_name) {
    const std::size_t last = reference.size() - 1;
    std::string warning;
    ordered_json j{{"reference", ref_name},
                   {"course", other_name},
                   {"work_reference", work(reference, 0, last, &warning)},
                   {"work_course", work(other, 0, last)},
                   {"L", effectiveness_L(reference, other, 0, last)},
                   {"M", optional_number(effectiveness_M(reference, other, 0, last))}};
    if (!warning.empty()) j["warning"] = warning;
    return j;
}

std::vector<std::string> run_simulate(const RunConfig& cfg, const std::string& invocation) {
    const auto& syn = cfg.synthetic;
    const ModelConfig model = build_model_config(cfg.model, syn.n);
    std::vector<double> rho;
    if (syn.vaccinations_per_day > 0.0) rho.assign(static_cast<std::size_t>(syn.n), syn.vaccinations_per_day);
    ParamVector truth = syn.truth;
    if (truth.ifrs.empty()) truth.ifrs = cfg.priors.spec.ifr_means;
    const auto generated = generate_synthetic(model, truth, rho, cfg.seed, syn.options);

    const fs::path dir = fs::path(cfg.output_dir) / "data";
    const auto paths = export_dataset(generated.data, dir.string(), invocation);
    std::vector<std::string> artifacts{paths.deaths};
    for (const auto* p : {&paths.cases, &paths.cases_by_age, &paths.vaccinations})
        if (!p->empty()) artifacts.push_back(*p);

    const auto& tp = generated.truth;
    ordered_json j;
    j["meta"] = meta(invocation, "rates per day; latent series in persons per day or persons");
    j["model"] = to_string(model.flags);
    j["likelihood"] = to_string(model.likelihood);
    j["seed"] = cfg.seed;
    j["reporting"] = tp.reporting;
    j["changepoints"] = model.changepoints;
    j["ifr_breaks"] = model.ifr_breaks;
    j["params"] = ordered_json{{"lambdas", tp.params.lambdas},
                               {"ifrs", tp.params.ifrs},
                               {"psi", std::isfinite(tp.params.psi) ? ordered_json(tp.params.psi) : ordered_json("inf")},
                               {"c_init", tp.params.c_init},
                               {"sigma", tp.params.sigma}};
    j["latent"] = ordered_json{{"C", tp.paths.C}, {"S", tp.paths.S}, {"I", tp.paths.I},
                               {"Rs", tp.paths.Rs}, {"theta", tp.paths.theta}, {"Rt", tp.paths.Rt}};
    const auto truth_path = dir / "truth.json";
    write_json(truth_path, j);
    artifacts.push_back(truth_path.string());
    return artifacts;
}

std::vector<std::string> run_fit(const RunConfig& cfg, const std::string& invocation) {
    const Dataset data = resolve_dataset(cfg);
    const auto fit = fit_variant(cfg, data, cfg.model.variant);
    return write_fit(fit, cfg, fs::path(cfg.output_dir) / kFitDir, invocation);
}

std::vector<std::string> run_select(const RunConfig& cfg, const std::string& invocation) {
    const Dataset data = resolve_dataset(cfg);
    if (cfg.selection.variants.empty()) throw ParameterError("selection needs at least one variant");
    const fs::path dir = fs::path(cfg.output_dir) / "select";
    std::vector<std::string> artifacts;
    std::vector<ModelScore> scores;
    std::vector<BridgeResult> evidence;
    for (const auto& variant : cfg.selection.variants) {
        const auto fit = fit_variant(cfg, data, variant);
        for (auto& a : write_fit(fit, cfg, dir / variant, invocation)) artifacts.push_back(a);
        const ChainDraws merged = merge_chains(fit.chains);
        ModelScore s = information_criteria(merged, *fit.posterior, fit.posterior->parameter_count(),
                                            cfg.selection.refine_max, cfg.seed);
        s.model = to_string(fit.model.flags);
        s.wall_days = fit.wall_seconds / 86400.0;
        if (cfg.selection.bridge) {
            BridgeOptions opt;
            opt.seed = cfg.seed;
            const auto b = bridge_log_ml(fit.chains, *fit.posterior, opt);
            s.log_ml = b.log_ml;
            s.log_ml_error = b.error;
            evidence.push_back(b);
        }
        scores.push_back(s);
    }

    const auto scores_path = dir / "scores.csv";
    {
        auto out = open_output(scores_path);
        csv_header(out, "information criteria per model variant (smaller is better)",
                   "criteria on the deviance scale; time_days in days of wall time", invocation);
        out << "model,k,n,AIC,BIC,DIC,DIC2,WAIC,p_dic,p_dic2,p_waic,time_days\n";
        for (const auto& s : scores) {
            out << s.model << "," << s.k << "," << s.n << "," << format_number(s.aic) << "," << format_number(s.bic)
                << "," << format_number(s.dic) << "," << format_number(s.dic2) << "," << format_number(s.waic) << ","
                << format_number(s.p_dic) << "," << format_number(s.p_dic2) << "," << format_number(s.p_waic) << ","
                << (cfg.omit_timing ? std::string("NA") : format_number(s.wall_days)) << "\n";
        }
    }
    artifacts.push_back(scores_path.string());

    if (cfg.selection.bridge) {
        const auto ev_path = dir / "evidence.csv";
        auto out = open_output(ev_path);
        csv_header(out, "log marginal likelihood per model and pairwise log Bayes factors",
                   "natural-log scale; error is the approximate standard error", invocation);
        out << "model,reference,log_ml,log_bf,error,iterations,converged\n";
        for (std::size_t i = 0; i < scores.size(); ++i)
            out << scores[i].model << ",," << format_number(evidence[i].log_ml) << ",,"
                << format_number(evidence[i].error) << "," << evidence[i].iterations << ","
                << (evidence[i].converged ? "true" : "false") << "\n";
        for (std::size_t i = 0; i < scores.size(); ++i)
            for (std::size_t k = i + 1; k < scores.size(); ++k) {
                const auto bf = bayes_factor(evidence[i], evidence[k]);
                out << scores[i].model << "," << scores[k].model << ",," << format_number(bf.value) << ","
                    << format_number(bf.error) << ",,\n";
            }
        artifacts.push_back(ev_path.string());
    }
    return artifacts;
}

struct FittedCourse {
    Dataset data;
    ModelConfig model;
    PriorSpec priors;
    DrawTable table;
};

FittedCourse load_fitted(const RunConfig& cfg) {
    FittedCourse f;
    f.data = resolve_dataset(cfg);
    f.model = build_model_config(cfg.model, f.data.size());
    f.priors = resolve_priors(cfg, f.data, f.model);
    const auto draws = fs::path(cfg.output_dir) / kFitDir / kDrawsFile;
    if (!fs::exists(draws)) throw DataError("no fitted draws at " + draws.string() + "; run 'fit' first");
    f.table = read_draws_csv(draws.string());
    return f;
}

std::vector<std::string> run_phase(const RunConfig& cfg, const std::string& invocation) {
    const auto fitted = load_fitted(cfg);
    const auto& model = fitted.model;
    const auto rho = fitted.data.vaccination_series();
    const ParamVector params = median_params(fitted.table, fitted.priors);
    const auto paths = simulate_paths(params, model, rho);
    if (!paths.feasible) throw NumericalError("posterior-median path is infeasible: " + paths.reason);

    const int a = cfg.phase.first_day;
    const int b = cfg.phase.last_day > 0 ? cfg.phase.last_day : model.n;
    if (a < 1 || b > model.n || b - a < 1) throw RangeError("phase interval must satisfy 1 <= first_day < last_day <= n");

    const auto actual_full = trajectory_from_counts(paths.S, paths.I, model.N, CourseLabel::actual);
    const auto rates = daily_rates(params, model);
    const auto q_full = conserved_q(actual_full, rates, model.tau, cfg.phase.departure);
    const Trajectory actual = slice(actual_full, a, b);

    const double per_day = 1.0 / cfg.phase.dt;
    if (std::fabs(per_day - std::round(per_day)) > 1e-9) throw ParameterError("phase.dt must divide one day");
    const double lambda_a = rates[static_cast<std::size_t>(a - 1)];
    Trajectory natural = natural_course(SirField{lambda_a, static_cast<double>(model.tau), 1.0}, actual.S.front(),
                                        actual.I.front(), b - a, cfg.phase.dt, static_cast<int>(std::lround(per_day)));
    for (std::size_t i = 0; i < natural.size(); ++i) natural.time[i] = static_cast<double>(a) + static_cast<double>(i);
    const auto q_natural = conserved_q(natural, std::vector<double>(natural.size(), lambda_a), model.tau).q;

    ordered_json measures;
    measures["meta"] = meta(invocation, "proportions of the population; work in squared proportions");
    measures["interval"] = {a, b};
    measures["parameters"] = ordered_json{{"lambdas", params.lambdas}, {"c_init", params.c_init}};
    ordered_json comps = ordered_json::array();
    comps.push_back(comparison(natural, actual, "natural", "actual"));

    std::optional<Trajectory> scenario;
    std::vector<double> q_scenario;
    if (!cfg.phase.scenario_lambdas.empty()) {
        ParamVector sp = params;
        sp.lambdas = cfg.phase.scenario_lambdas;
        const auto spaths = simulate_paths(sp, model, rho);
        if (!spaths.feasible) throw NumericalError("scenario path is infeasible: " + spaths.reason);
        const auto sfull = trajectory_from_counts(spaths.S, spaths.I, model.N, CourseLabel::scenario);
        scenario = slice(sfull, a, b);
        const auto qs = conserved_q(sfull, daily_rates(sp, model), model.tau).q;
        q_scenario.assign(qs.begin() + (a - 1), qs.begin() + b);
        comps.push_back(comparison(actual, *scenario, "actual", "scenario"));
    }
    measures["comparisons"] = comps;
    measures["q"] = ordered_json{
        {"first", q_full.q.front()},
        {"ergodic_mean", q_full.ergodic_mean.back()},
        {"departure_day", q_full.departure ? ordered_json(static_cast<int>(*q_full.departure) + 1) : ordered_json()},
        {"departure_date",
         q_full.departure ? ordered_json(format_date(fitted.data.dates[*q_full.departure])) : ordered_json()},
        {"deviation_from_natural", q_deviation(q_natural.front(), q_full.q[static_cast<std::size_t>(a - 1)])}};

    const fs::path dir = fs::path(cfg.output_dir) / "phase";
    const auto traj_path = dir / "trajectory.csv";
    {
        auto out = open_output(traj_path);
        csv_header(out, "phase-plane trajectories (S, I), speed v_t and conserved quantity Q_t",
                   "S and I as proportions of the population; v_t per day; Q_t dimensionless", invocation);
        out << "label,date,t,S,I,v_t,Q_t\n";
        write_trajectory_rows(out, actual_full, q_full.q, fitted.data);
        write_trajectory_rows(out, natural, q_natural, fitted.data);
        if (scenario) write_trajectory_rows(out, *scenario, q_scenario, fitted.data);
    }
    const auto measures_path = dir / "measures.json";
    write_json(measures_path, measures);
    return {traj_path.string(), measures_path.string()};
}

std::vector<std::string> run_elicit(const RunConfig& cfg, const std::string& invocation) {
    const Dataset data = resolve_dataset(cfg);
    if (!data.has_cases_by_age()) throw DataError("elicit-ifr needs cases by age");
    if (!cfg.priors.reference_ifr) throw ParameterError("elicit-ifr needs priors.reference_ifr");
    const ModelConfig model = build_model_config(cfg.model, data.size());
    const AgeCaseMatrix acm{data.cases_by_age, *cfg.priors.reference_ifr};
    const auto means = elicit_ifr(acm, model.ifr_breaks);
    const auto path = fs::path(cfg.output_dir) / "ifr_prior.csv";
    auto out = open_output(path);
    csv_header(out, "IFR prior mean per break segment", "probability of death per infection", invocation);
    out << "segment,start_date,end_date,ifr_mean\n";
    for (std::size_t b = 0; b < means.size(); ++b) {
        const int lo = model.ifr_breaks[b], hi = model.ifr_breaks[b + 1] - 1;
        out << b + 1 << "," << format_date(data.dates.front() + std::chrono::days{lo - 1}) << ","
            << format_date(data.dates.front() + std::chrono::days{hi - 1}) << "," << format_number(means[b]) << "\n";
    }
    return {path.string()};
}

std::vector<std::string> run_smooth(const RunConfig& cfg, const std::string& invocation) {
    const auto fitted = load_fitted(cfg);
    if (!fitted.data.has_cases()) throw DataError("smooth-proportion needs recorded cases");
    const auto rho = fitted.data.vaccination_series();
    const auto& table = fitted.table;
    Matrix total(table.values.rows(), fitted.model.n);
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        const auto p = params_from_row(table.names, table.values.row(i).transpose(), fitted.priors);
        const auto paths = simulate_paths(p, fitted.model, rho);
        for (int t = 0; t < fitted.model.n; ++t)
            total(i, t) = paths.feasible ? paths.C[static_cast<std::size_t>(t)] : std::nan("");
    }
    const auto prop = observed_proportion(fitted.data.cases, total, cfg.span);
    const auto path = fs::path(cfg.output_dir) / "proportion.csv";
    auto out = open_output(path);
    csv_header(out, "recorded cases over posterior total cases, per-day median and loess curve (span " +
                        format_number(cfg.span) + ")",
               "dimensionless proportion; excluded counts draws with no total cases", invocation);
    out << "date,t,median,smoothed,excluded\n";
    for (int t = 0; t < fitted.model.n; ++t) {
        const auto i = static_cast<std::size_t>(t);
        out << format_date(fitted.data.dates[i]) << "," << t + 1 << ","
            << (std::isfinite(prop.median[i]) ? format_number(prop.median[i]) : std::string("NA")) << ","
            << format_number(prop.smoothed[i]) << "," << prop.excluded_per_day[i] << "\n";
    }
    return {path.string()};
}

}  // namespace

std::optional<Command> command_from_string(const std::string& s) {
    if (s == "fit") return Command::fit;
    if (s == "simulate") return Command::simulate;
    if (s == "select") return Command::select;
    if (s == "phase") return Command::phase;
    if (s == "elicit-ifr") return Command::elicit_ifr;
    if (s == "smooth-proportion") return Command::smooth_proportion;
    return std::nullopt;
}

std::string to_string(Command c) {
    switch (c) {
        case Command::fit: return "fit";
        case Command::simulate: return "simulate";
        case Command::select: return "select";
        case Command::phase: return "phase";
        case Command::elicit_ifr: return "elicit-ifr";
        case Command::smooth_proportion: return "smooth-proportion";
    }
    return "fit";
}

Dataset resolve_dataset(const RunConfig& cfg) {
    DatasetPaths paths = cfg.data.paths;
    if (paths.deaths.empty()) {
        const fs::path dir = fs::path(cfg.output_dir) / "data";
        auto pick = [&](const char* name) {
            const auto p = dir / name;
            return fs::exists(p) ? p.string() : std::string();
        };
        paths.deaths = pick("deaths.csv");
        if (paths.deaths.empty()) throw DataError("no deaths file configured and none under " + dir.string());
        paths.cases = pick("cases.csv");
        paths.cases_by_age = pick("cases_by_age.csv");
        paths.vaccinations = pick("vaccinations.csv");
    }
    return load_dataset(paths, cfg.data.gap_policy);
}

PriorSpec resolve_priors(const RunConfig& cfg, const Dataset& data, const ModelConfig& model) {
    PriorSpec spec = cfg.priors.spec;
    if (spec.ifr_means.empty()) {
        if (!data.has_cases_by_age() || !cfg.priors.reference_ifr)
            throw ParameterError("IFR prior means need priors.ifr_means or cases by age with priors.reference_ifr");
        spec.ifr_means = elicit_ifr(AgeCaseMatrix{data.cases_by_age, *cfg.priors.reference_ifr}, model.ifr_breaks);
    }
    spec.validate(model.ifr_segments());
    return spec;
}

FitOutput fit_variant(const RunConfig& cfg, const Dataset& data, const std::string& variant) {
    FitOutput out;
    out.model = build_model_config(cfg.model, data.size(), variant);
    out.variant = to_string(out.model.flags);
    out.priors = resolve_priors(cfg, data, out.model);
    out.posterior = std::make_shared<EpidemicPosterior>(out.model, out.priors, data.deaths, data.vaccination_series());
    SamplerConfig sampler = cfg.sampler;
    sampler.seed = cfg.seed;
    const auto started = std::chrono::steady_clock::now();
    const GradientFn grad =
        cfg.finite_difference_gradient ? finite_difference(*out.posterior) : out.posterior->gradient_fn();
    out.chains = run_chains(*out.posterior, grad, sampler, cfg.chains);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

void write_draws_csv(const std::string& path, const std::vector<ChainDraws>& chains, const std::string& invocation) {
    if (chains.empty()) throw ContractError("no chains to write");
    auto out = open_output(path);
    csv_header(out, "posterior draws after warmup, constrained scale",
               "lambda per day; ifr and psi dimensionless; c_init in persons per day; lp in nats", invocation);
    out << "chain,draw,lp";
    for (const auto& n : chains.front().names) out << "," << n;
    out << "\n";
    for (const auto& c : chains)
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            out << c.chain << "," << i + 1 << "," << format_number(c.lp[i]);
            for (Eigen::Index j = 0; j < c.constrained.cols(); ++j) out << "," << format_number(c.constrained(i, j));
            out << "\n";
        }
}

DrawTable read_draws_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    DrawTable t;
    std::string line;
    std::vector<std::vector<double>> rows;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (!header) {
            if (fields.size() < 4 || fields[0] != "chain" || fields[1] != "draw" || fields[2] != "lp")
                throw DataError(path + ":" + std::to_string(lineno) + ": unexpected header '" + line + "'");
            t.names.assign(fields.begin() + 3, fields.end());
            header = true;
            continue;
        }
        if (fields.size() != t.names.size() + 3)
            throw DataError(path + ":" + std::to_string(lineno) + ": wrong column count '" + line + "'");
        std::vector<double> row;
        try {
            t.chain.push_back(std::stoi(fields[0]));
            for (std::size_t k = 2; k < fields.size(); ++k) row.push_back(std::stod(fields[k]));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed row '" + line + "'");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no draws");
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
    t.lp.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.lp[static_cast<Eigen::Index>(i)] = rows[i][0];
        for (std::size_t j = 0; j < t.names.size(); ++j)
            t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j + 1];
    }
    return t;
}

ParamVector params_from_row(const std::vector<std::string>& names, const Vector& row, const PriorSpec& priors) {
    if (static_cast<Eigen::Index>(names.size()) != row.size()) throw ParameterError("draw row does not match names");
    ParamVector p;
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& n = names[k];
        const double v = row[static_cast<Eigen::Index>(k)];
        if (n.rfind("lambda_", 0) == 0) p.lambdas.push_back(v);
        else if (n.rfind("ifr_", 0) == 0) p.ifrs.push_back(v);
        else if (n == "psi") p.psi = v;
        else if (n == "c_init") p.c_init = v;
        else if (n == "sigma") p.sigma = v;
        else throw ParameterError("unknown parameter column '" + n + "'");
    }
    if (p.ifrs.empty()) p.ifrs = priors.ifr_means;
    return p;
}

PipelineResult run_pipeline(const RunConfig& cfg, Command command, const std::string& invocation) {
    PipelineResult result;
    const fs::path failed = fs::path(cfg.output_dir) / "FAILED";
    try {
        fs::create_directories(cfg.output_dir);
        fs::remove(failed);
        switch (command) {
            case Command::simulate: result.artifacts = run_simulate(cfg, invocation); break;
            case Command::fit: result.artifacts = run_fit(cfg, invocation); break;
            case Command::select: result.artifacts = run_select(cfg, invocation); break;
            case Command::phase: result.artifacts = run_phase(cfg, invocation); break;
            case Command::elicit_ifr: result.artifacts = run_elicit(cfg, invocation); break;
            case Command::smooth_proportion: result.artifacts = run_smooth(cfg, invocation); break;
        }
    } catch (const std::exception& e) {
        result.status = 1;
        result.error = e.what();
        std::error_code ec;
        fs::create_directories(cfg.output_dir, ec);
        std::ofstream marker(failed);
        marker << "command: " << invocation << "\nstage: " << to_string(command) << "\nerror: " << e.what()
               << "\nartifacts in this directory from this run are incomplete\n";
    }
    return result;
}

}  // namespace epi
