#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "epi/config.hpp"
#include "epi/criteria.hpp"
#include "epi/dataset.hpp"
#include "epi/hmc.hpp"
#include "epi/posterior.hpp"

namespace epi {

enum class Command { fit, simulate, select, phase, elicit_ifr, smooth_proportion };

std::optional<Command> command_from_string(const std::string& s);
std::string to_string(Command c);

struct PipelineResult {
    int status = 0;  // 0 ok, 1 failure
    std::vector<std::string> artifacts;
    std::string error;
};

// Runs one command. `invocation` is recorded in every artifact header. On failure a
// FAILED file naming the stage and error is left in the output directory.
PipelineResult run_pipeline(const RunConfig& config, Command command, const std::string& invocation);

// Building blocks, exposed for tests.

// Configured data, or the simulated series under <output_dir>/data when no deaths file is set.
Dataset resolve_dataset(const RunConfig& config);

// Configured IFR means, or means elicited from cases by age and the reference IFRs.
PriorSpec resolve_priors(const RunConfig& config, const Dataset& data, const ModelConfig& model);

struct FitOutput {
    std::string variant;
    ModelConfig model;
    PriorSpec priors;
    std::shared_ptr<EpidemicPosterior> posterior;
    std::vector<ChainDraws> chains;
    double wall_seconds = 0.0;
};

FitOutput fit_variant(const RunConfig& config, const Dataset& data, const std::string& variant);

struct DrawTable {
    std::vector<std::string> names;  // parameter columns
    std::vector<int> chain;
    Matrix values;                   // draws x parameters, constrained scale
    Vector lp;
};

void write_draws_csv(const std::string& path, const std::vector<ChainDraws>& chains, const std::string& invocation);
DrawTable read_draws_csv(const std::string& path);

// Parameter vector from a constrained draw row named as EpidemicPosterior::names().
ParamVector params_from_row(const std::vector<std::string>& names, const Vector& row, const PriorSpec& priors);

}  // namespace epi
