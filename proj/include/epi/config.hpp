#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epi/dataset.hpp"
#include "epi/delay.hpp"
#include "epi/hmc.hpp"
#include "epi/model.hpp"
#include "epi/phase_plane.hpp"
#include "epi/priors.hpp"
#include "epi/synthetic.hpp"

namespace epi {

// Model structure independent of the series length.
struct ModelSettings {
    std::string variant = "seir";
    Likelihood likelihood = Likelihood::negbin;
    double N = 0.0;
    int tau = 6;
    int h = 2;
    int t_star = 84;
    double a1 = 0.4;
    double a2 = 0.1;
    double births_per_day = 0.0;
    std::vector<int> changepoints;  // empty: `segments` evenly spaced segments
    int segments = 3;
    std::vector<int> ifr_breaks;    // empty: one segment over the whole series
    DelaySpec death_delay = DelaySpec::infection_to_death_default();
    std::optional<DelaySpec> recovery_delay;
};

// Full ModelConfig for a series of n days; `variant` overrides the configured one.
ModelConfig build_model_config(const ModelSettings& settings, int n, const std::string& variant = {});

struct PriorSettings {
    PriorSpec spec;                                 // ifr_means may be empty
    std::optional<std::array<double, 4>> reference_ifr;
};

struct DataSettings {
    DatasetPaths paths;  // empty deaths path: read the simulated data under the output directory
    GapPolicy gap_policy = GapPolicy::strict;
};

struct SyntheticSettings {
    int n = 60;
    SyntheticOptions options;
    ParamVector truth;
    double vaccinations_per_day = 0.0;  // zero leaves the series out
};

struct SelectionSettings {
    std::vector<std::string> variants{"sir",  "sir.vacc",  "sir.dem",  "sir.vacc.dem",
                                      "seir", "seir.vacc", "seir.dem", "seir.vacc.dem"};
    bool bridge = true;
    bool refine_max = false;
};

struct PhaseSettings {
    int first_day = 1;
    int last_day = 0;  // zero: last day of the series
    double dt = 0.01;
    std::vector<double> scenario_lambdas;  // empty: no scenario comparison
    DepartureRule departure;
};

struct RunConfig {
    DataSettings data;
    ModelSettings model;
    PriorSettings priors;
    SamplerConfig sampler;
    int chains = 4;
    bool finite_difference_gradient = false;  // sampler.gradient = "finite_difference"
    SyntheticSettings synthetic;
    SelectionSettings selection;
    PhaseSettings phase;
    double span = 0.3;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    bool omit_timing = false;
};

// Relative data paths resolve against `base_dir`. Unknown keys are rejected.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

}  // namespace epi
