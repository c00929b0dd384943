#ifndef AIF_GENMODEL_HPP
#define AIF_GENMODEL_HPP

#include <string>
#include <vector>

#include "aif/categorical.hpp"

namespace aif {

/// One hidden state factor. controlling_control is the index of the control
/// factor driving this factor's transitions, or -1 for a passive factor.
struct FactorSpec {
    std::string name;
    int card = 0;
    int controlling_control = -1;
};

struct ModalitySpec {
    std::string name;
    int card = 0;
};

struct ControlSpec {
    std::string name;
    int card = 0;
};

struct ModelSpec {
    std::vector<FactorSpec> factors;
    std::vector<ModalitySpec> modalities;
    std::vector<ControlSpec> controls;
    int horizon = 1;

    std::size_t n_factors() const { return factors.size(); }
    std::size_t n_modalities() const { return modalities.size(); }
    std::size_t joint_state_card() const;
    std::size_t joint_action_card() const;
    void validate() const;
};

/// A joint control assignment: one level per control factor.
using JointAction = std::vector<int>;

struct Policy {
    std::vector<JointAction> actions; // length = horizon
};

/// Factored generative model. A[m] is conditioned on all hidden factors in
/// declaration order; B[f] on (previous level of factor f, controlling action
/// level). C[m] holds log-preference utilities, not probabilities.
struct GenerativeModel {
    ModelSpec spec;
    std::vector<Cpt> A;
    std::vector<Cpt> B;
    std::vector<std::vector<double>> C;
    std::vector<Categorical> D;

    // Per-modality, per-joint-condition column entropies of A; used by the
    // policy evaluator. Refresh after any A rebuild.
    std::vector<std::vector<double>> a_column_entropy;

    void refresh_entropy_cache();
    void validate(double tol = 1e-9) const;
};

/// Prior mapping from signal level to "acceptable production" probability.
struct ContextMap {
    std::vector<double> p_acceptable_given_obs;

    double weight(int obs, int context) const {
        double p = p_acceptable_given_obs.at(static_cast<std::size_t>(obs));
        return context == 0 ? p : 1.0 - p;
    }
};

// Cournot firm model layout: factors warehouse/context/epistemic, modalities
// sales/production/signal/analysis, controls production/analysis.
inline constexpr int kContextAcceptable = 0;
inline constexpr int kContextReduce = 1;
inline constexpr int kEpistemicNotAnalyzed = 0;
inline constexpr int kEpistemicAnalyzed = 1;
inline constexpr int kActionDoNothing = 0;
inline constexpr int kActionAnalysis = 1;

ContextMap default_context_map();

/// Parameters for one firm's generative model.
struct FirmModelParams {
    int capacity = 10;       // warehouse levels 0..capacity
    int max_production = 6;  // production levels 0..max_production
    int br_target = 5;
    double sales_sigma = 2.0;
    double production_sigma = 3.0;
    double signal_sigma = 1.0;
    double transition_sigma = 1.5;
    int context_shift_sales = 2;      // extra sales needed in "reduce" context
    int context_shift_production = 2; // production likelihood shift in "reduce"
    int horizon = 2;
    double kappa = 0.1;                       // euro-to-utility scale
    std::vector<double> occupancy_cost = {0.0, -2.0, -6.0, -12.0};
    double analysis_cost = -4.0;
    double unit_cost = 16.0;
};

int signal_band(int warehouse, int capacity);

Cpt build_sales_likelihood(int context, double sigma, int br_target,
                           const FirmModelParams& params);
Cpt build_production_likelihood(int context, double sigma,
                                const FirmModelParams& params);
Cpt fuse_context_likelihood(const Cpt& p_o_given_w, const ContextMap& ctx_map,
                            int context);
Cpt build_signal_likelihood(int epistemic, int context, double sigma,
                            const ContextMap& ctx_map, const FirmModelParams& params);
Cpt build_warehouse_transition(int br, double sigma_b, const FirmModelParams& params);
Cpt build_context_transition();
Cpt build_epistemic_transition();
Cpt build_production_record_transition(const FirmModelParams& params);
std::vector<Categorical> build_initial_prior(const FirmModelParams& params);

std::vector<Policy> enumerate_policies(const ModelSpec& spec, int policy_cap = 10000);

/// Assembles the full firm model (A, B, C, D) from params. Hidden factors:
/// warehouse, context, epistemic, and a production record driven by the same
/// control as the warehouse; the record is what couples production choices
/// into predicted sales and production costs. C_sales starts at zero; the
/// loop replaces it each step.
GenerativeModel build_firm_model(const FirmModelParams& params);

/// Rebuilds the warehouse transition for a new best-response target, in
/// place. The sales likelihood is anchored on the production record, not on
/// the BR target, so it needs no rebuild.
void rebuild_for_br(GenerativeModel& gm, const FirmModelParams& params, int br);

} // namespace aif

#endif
