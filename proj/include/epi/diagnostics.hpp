#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epi/hmc.hpp"

namespace epi {

struct ParameterDiagnostics {
    std::string name;
    std::optional<double> rhat;  // empty when the draws are constant
    std::optional<double> ess_bulk;
    std::optional<double> ess_tail;
    bool defined() const noexcept { return rhat.has_value(); }
};

// Rank-normalised split-Rhat (max of bulk and folded) and bulk/tail ESS.
// `series[c]` holds the draws of chain c; all chains must have the same length.
ParameterDiagnostics diagnose(const std::vector<std::vector<double>>& series, const std::string& name = {});

// Per-parameter diagnostics over at least two chains, on the constrained scale.
std::vector<ParameterDiagnostics> diagnostics(const std::vector<ChainDraws>& chains);

// Plain (non-split, non-ranked) Rhat and autocorrelation ESS, used by other estimators.
double basic_rhat(const std::vector<std::vector<double>>& chains);
double effective_sample_size(const std::vector<std::vector<double>>& chains);

}  // namespace epi
