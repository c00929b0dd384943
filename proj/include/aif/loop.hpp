#ifndef AIF_LOOP_HPP
#define AIF_LOOP_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aif/config.hpp"
#include "aif/genmodel.hpp"
#include "aif/inference.hpp"
#include "aif/srp.hpp"
#include "aif/trace.hpp"

namespace aif {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Price estimate for a feature vector (own quantity first, then opponents'
/// last sales in firm order).
using PricePredictor = std::function<double(const std::vector<double>&)>;

struct PreferenceUpdate {
    std::vector<std::vector<double>> C; // one vector per modality
    std::vector<double> price_by_production;
};

/// Rebuilds all preference vectors from the current price model: sales
/// utilities from per-production price estimates extended over the sales
/// support by a least-squares line whose slope is pinned to the firm's known
/// price sensitivity, production costs, and the static occupancy/analysis
/// costs.
PreferenceUpdate update_preferences(const PricePredictor& predict_price,
                                    const FirmModelParams& params, double price_slope_b,
                                    const std::vector<double>& opponents_last_sales);

struct AgentRuntime {
    FirmModelParams params;
    GenerativeModel gm;
    std::vector<Policy> policies;
    Belief belief;
    SrpEnsemble ensemble;
    double a_hat_old = 0.0;
    int br_current = 0;
    double unit_cost = 0.0;
    JointAction last_action;
    JointObservation last_obs;
    std::vector<double> opponents_last_sales;
    double market_b = 1.0;

    AgentRuntime(FirmModelParams p, SrpConfig srp_cfg, std::size_t n_firms,
                 std::uint64_t ensemble_seed, int policy_cap = 10000);
};

/// Algorithm step: when the intercept estimate moved more than 10% relative
/// to the stored one, recompute the best response against opponents' last
/// sales and rebuild the warehouse transition. Always adopts a_hat_new.
bool maybe_recompute_br(AgentRuntime& agent, double a_hat_new);

struct RunDiagnostics {
    double max_vfe_increase = 0.0; // worst within-call VFE increase observed
    double max_efe_identity_gap = 0.0;
    double min_epistemic = 0.0;
    int non_converged_calls = 0;
    int total_overflow_discarded = 0;
};

struct RunResult {
    std::vector<StepRecord> records;
    RunDiagnostics diag;
    bool completed = false;
    std::string error;
};

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed);

} // namespace aif

#endif
