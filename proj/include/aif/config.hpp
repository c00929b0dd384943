#ifndef AIF_CONFIG_HPP
#define AIF_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aif/genmodel.hpp"
#include "aif/inference.hpp"
#include "aif/market.hpp"
#include "aif/srp.hpp"

namespace aif {

struct FirmConfig {
    double cost = 0.0;
    std::optional<double> sales_sigma; // per-firm precision override
};

struct AgentConfig {
    double kappa = 0.1;
    double sales_sigma = 2.0;
    double production_sigma = 3.0;
    double signal_sigma = 1.0;
    double transition_sigma = 1.5;
    int context_shift_sales = 2;
    int context_shift_production = 2;
    int policy_horizon = 2;
    double policy_precision = 16.0;
    int policy_cap = 10000;
    int max_iterations = 16;
    double convergence_tol = 1e-6;
    std::string selection_mode = "argmin";
    std::vector<double> occupancy_cost = {0.0, -2.0, -6.0, -12.0};
    double analysis_cost = -4.0;
    bool rebuild_sales_likelihood = true;
};

struct SrpSection {
    int learners = 10;
    int max_features = 3;
    double poisson_lambda = 6.0;
    double adwin_delta = 0.002;
    int window_cap = 4096;
    int pretrain_count = 50;
};

struct ExperimentConfig {
    std::string scenario = "custom";
    std::uint64_t seed = 0;
    MarketParams market;
    std::vector<FirmConfig> firms;
    AgentConfig agent;
    SrpSection srp;

    InferenceConfig inference_config() const;
    FirmModelParams firm_model_params(std::size_t firm_index) const;
    void validate() const;
};

/// Built-in parameterization for one of the named scenarios.
ExperimentConfig scenario_defaults(const std::string& scenario_id);

/// Parses a config file: starts from the scenario's defaults, then applies
/// any keys present in the file on top. Unknown keys are rejected.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Full materialization, parseable by parse_config_text.
std::string resolved_config_json(const ExperimentConfig& cfg);

} // namespace aif

#endif
