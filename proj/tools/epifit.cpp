#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "epi/config.hpp"
#include "epi/errors.hpp"
#include "epi/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bayesian epidemic model fitting from daily deaths", "epifit"};
    std::string command, config_path, output_dir, model, likelihood;
    std::uint64_t seed = 0;
    int chains = 0;
    double span = 0.0;
    bool omit_timing = false;
    app.add_option("command", command, "fit | simulate | select | phase | elicit-ifr | smooth-proportion")
        ->required();
    app.add_option("--config", config_path, "JSON run configuration")->required();
    auto* seed_opt = app.add_option("--seed", seed, "master random seed");
    auto* chains_opt = app.add_option("--chains", chains, "number of HMC chains")->check(CLI::PositiveNumber);
    app.add_option("--output-dir", output_dir, "directory for artifacts");
    app.add_option("--model", model, "variant: {sir|seir}[.vacc][.dem][.seirs]");
    app.add_option("--likelihood", likelihood, "negbin | poisexp | poislognorm");
    auto* span_opt = app.add_option("--span", span, "loess span for smooth-proportion")->check(CLI::Range(0.0, 1.0));
    app.add_flag("--omit-timing", omit_timing, "leave wall-clock times out of artifacts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const auto cmd = epi::command_from_string(command);
    if (!cmd) {
        std::cerr << "epifit: unknown command '" << command << "'\n" << app.help();
        return 2;
    }

    epi::RunConfig cfg;
    try {
        cfg = epi::load_run_config(config_path);
        if (*seed_opt) cfg.seed = seed;
        if (*chains_opt) cfg.chains = chains;
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (!model.empty()) {
            epi::model_flags_from_string(model);
            cfg.model.variant = model;
        }
        if (!likelihood.empty()) cfg.model.likelihood = epi::likelihood_from_string(likelihood);
        if (*span_opt) cfg.span = span;
        cfg.omit_timing = omit_timing;
    } catch (const std::exception& e) {
        std::cerr << "epifit: " << e.what() << "\n";
        return 1;
    }

    std::string invocation = "epifit";
    for (int i = 1; i < argc; ++i) invocation += std::string(" ") + argv[i];

    const auto result = epi::run_pipeline(cfg, *cmd, invocation);
    if (result.status != 0) {
        std::cerr << "epifit " << command << " failed: " << result.error << "\n";
        return 1;
    }
    for (const auto& a : result.artifacts) std::cout << a << "\n";
    return 0;
}
