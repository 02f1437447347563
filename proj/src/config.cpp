#include "epi/config.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "epi/errors.hpp"
#include "json.hpp"

namespace epi {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ParameterError("config: '" + where + "' must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
        if (!keys.count(item.key())) throw ParameterError("config: unknown key '" + where + "." + item.key() + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParameterError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

DelaySpec read_delay(const json& j, const std::string& where) {
    check_keys(j, where, {"components"});
    DelaySpec spec;
    for (const auto& c : j.at("components")) {
        if (!c.is_array() || c.size() != 2) throw ParameterError("config: " + where + " components are [shape, rate]");
        spec.components.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    if (spec.components.empty() || spec.components.size() > 2)
        throw ParameterError("config: " + where + " needs one or two Gamma components");
    return spec;
}

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

ModelConfig build_model_config(const ModelSettings& s, int n, const std::string& variant) {
    ModelConfig c;
    c.n = n;
    c.N = s.N;
    c.tau = s.tau;
    c.h = s.h;
    c.t_star = s.t_star;
    c.a1 = s.a1;
    c.a2 = s.a2;
    c.A = s.births_per_day;
    c.flags = model_flags_from_string(variant.empty() ? s.variant : variant);
    c.likelihood = s.likelihood;
    c.changepoints = s.changepoints.empty() ? even_changepoints(n, c.exposed_days(), s.segments) : s.changepoints;
    c.ifr_breaks = s.ifr_breaks.empty() ? std::vector<int>{1, n + 1} : s.ifr_breaks;
    if (!c.flags.demography) c.A = 0.0;
    c.death_delay = discretize_delay(s.death_delay, n, DelayKind::infection_to_death);
    if (c.flags.seirs) {
        if (!s.recovery_delay)
            throw ParameterError("SEIRS needs model.recovery_delay (no default recovery-time distribution)");
        c.recovery_delay = discretize_delay(*s.recovery_delay, n, DelayKind::infection_to_recovery);
    }
    c.validate();
    return c;
}

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParameterError(std::string("config: not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"data", "model", "priors", "sampler", "synthetic", "selection", "phase", "span", "output_dir", "seed"});
    RunConfig cfg;

    if (root.contains("data")) {
        const auto& d = root["data"];
        check_keys(d, "data", {"deaths", "cases", "cases_by_age", "vaccinations", "gap_policy"});
        read(d, "deaths", cfg.data.paths.deaths);
        read(d, "cases", cfg.data.paths.cases);
        read(d, "cases_by_age", cfg.data.paths.cases_by_age);
        read(d, "vaccinations", cfg.data.paths.vaccinations);
        for (auto* p : {&cfg.data.paths.deaths, &cfg.data.paths.cases, &cfg.data.paths.cases_by_age,
                        &cfg.data.paths.vaccinations}) {
            *p = resolve(base_dir, *p);
            if (!p->empty() && !std::filesystem::exists(*p)) throw DataError("config: data file not found: " + *p);
        }
        std::string policy = "strict";
        read(d, "gap_policy", policy);
        cfg.data.gap_policy = gap_policy_from_string(policy);
    }

    if (root.contains("model")) {
        const auto& m = root["model"];
        check_keys(m, "model",
                   {"variant", "likelihood", "N", "tau", "h", "t_star", "a1", "a2", "births_per_day", "changepoints",
                    "segments", "ifr_breaks", "death_delay", "recovery_delay"});
        auto& s = cfg.model;
        read(m, "variant", s.variant);
        model_flags_from_string(s.variant);
        std::string lik = to_string(s.likelihood);
        read(m, "likelihood", lik);
        s.likelihood = likelihood_from_string(lik);
        read(m, "N", s.N);
        read(m, "tau", s.tau);
        read(m, "h", s.h);
        read(m, "t_star", s.t_star);
        read(m, "a1", s.a1);
        read(m, "a2", s.a2);
        read(m, "births_per_day", s.births_per_day);
        read(m, "changepoints", s.changepoints);
        read(m, "segments", s.segments);
        read(m, "ifr_breaks", s.ifr_breaks);
        if (m.contains("death_delay")) s.death_delay = read_delay(m["death_delay"], "model.death_delay");
        if (m.contains("recovery_delay")) s.recovery_delay = read_delay(m["recovery_delay"], "model.recovery_delay");
    }
    if (!(cfg.model.N > 0.0)) throw ParameterError("config: model.N (population) is required");

    if (root.contains("priors")) {
        const auto& p = root["priors"];
        check_keys(p, "priors", {"lambda", "psi", "c_init", "sigma", "ifr_means", "ifr_sd", "reference_ifr"});
        auto& spec = cfg.priors.spec;
        auto two = [&](const char* key, double& a, double& b, const char* ka, const char* kb) {
            if (!p.contains(key)) return;
            check_keys(p[key], std::string("priors.") + key, {ka, kb});
            read(p[key], ka, a);
            read(p[key], kb, b);
        };
        two("lambda", spec.lambda.mu, spec.lambda.sigma, "mu", "sigma");
        two("sigma", spec.sigma.mu, spec.sigma.sigma, "mu", "sigma");
        two("psi", spec.psi.shape, spec.psi.rate, "shape", "rate");
        two("c_init", spec.c_init.shape, spec.c_init.rate, "shape", "rate");
        read(p, "ifr_means", spec.ifr_means);
        read(p, "ifr_sd", spec.ifr_sd);
        if (p.contains("reference_ifr")) {
            std::array<double, 4> ref{};
            read(p, "reference_ifr", ref);
            cfg.priors.reference_ifr = ref;
        }
    }

    if (root.contains("sampler")) {
        const auto& s = root["sampler"];
        check_keys(s, "sampler",
                   {"chains", "warmup", "samples", "thin", "target_accept", "initial_step", "integration_time",
                    "max_leapfrog", "adapt_metric", "gradient"});
        read(s, "chains", cfg.chains);
        read(s, "warmup", cfg.sampler.warmup);
        read(s, "samples", cfg.sampler.samples);
        read(s, "thin", cfg.sampler.thin);
        read(s, "target_accept", cfg.sampler.target_accept);
        read(s, "initial_step", cfg.sampler.initial_step);
        read(s, "integration_time", cfg.sampler.integration_time);
        read(s, "max_leapfrog", cfg.sampler.max_leapfrog);
        read(s, "adapt_metric", cfg.sampler.adapt_metric);
        if (s.contains("gradient")) {
            const std::string g = s["gradient"].get<std::string>();
            if (g != "analytic" && g != "finite_difference")
                throw ParameterError("sampler.gradient must be 'analytic' or 'finite_difference'");
            cfg.finite_difference_gradient = g == "finite_difference";
        }
    }

    if (root.contains("synthetic")) {
        const auto& s = root["synthetic"];
        check_keys(s, "synthetic", {"n", "start_date", "reporting", "age_shares", "vaccinations_per_day", "truth"});
        auto& syn = cfg.synthetic;
        read(s, "n", syn.n);
        if (s.contains("start_date")) syn.options.start = parse_date(s["start_date"].get<std::string>());
        read(s, "reporting", syn.options.reporting);
        if (s.contains("age_shares")) {
            std::array<double, 4> shares{};
            read(s, "age_shares", shares);
            syn.options.age_shares = shares;
        }
        read(s, "vaccinations_per_day", syn.vaccinations_per_day);
        if (s.contains("truth")) {
            const auto& t = s["truth"];
            check_keys(t, "synthetic.truth", {"lambdas", "ifrs", "psi", "c_init", "sigma"});
            read(t, "lambdas", syn.truth.lambdas);
            read(t, "ifrs", syn.truth.ifrs);
            if (t.contains("psi") && t["psi"].is_string() && t["psi"].get<std::string>() == "inf")
                syn.truth.psi = std::numeric_limits<double>::infinity();
            else
                read(t, "psi", syn.truth.psi);
            read(t, "c_init", syn.truth.c_init);
            read(t, "sigma", syn.truth.sigma);
        }
    }

    if (root.contains("selection")) {
        const auto& s = root["selection"];
        check_keys(s, "selection", {"variants", "bridge", "refine_max"});
        read(s, "variants", cfg.selection.variants);
        for (const auto& v : cfg.selection.variants) model_flags_from_string(v);
        read(s, "bridge", cfg.selection.bridge);
        read(s, "refine_max", cfg.selection.refine_max);
    }

    if (root.contains("phase")) {
        const auto& s = root["phase"];
        check_keys(s, "phase",
                   {"first_day", "last_day", "dt", "scenario_lambdas", "departure_window", "departure_t", "departure_run"});
        read(s, "first_day", cfg.phase.first_day);
        read(s, "last_day", cfg.phase.last_day);
        read(s, "dt", cfg.phase.dt);
        read(s, "scenario_lambdas", cfg.phase.scenario_lambdas);
        read(s, "departure_window", cfg.phase.departure.window);
        read(s, "departure_t", cfg.phase.departure.t_threshold);
        read(s, "departure_run", cfg.phase.departure.run);
    }

    read(root, "span", cfg.span);
    read(root, "output_dir", cfg.output_dir);
    read(root, "seed", cfg.seed);
    cfg.output_dir = resolve(base_dir, cfg.output_dir);
    if (cfg.chains < 1) throw ParameterError("config: sampler.chains must be at least 1");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    std::ostringstream text;
    text << in.rdbuf();
    const auto base = std::filesystem::path(path).parent_path();
    return parse_run_config(text.str(), base.empty() ? "." : base.string());
}

}  // namespace epi
