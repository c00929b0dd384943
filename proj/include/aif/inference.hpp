#ifndef AIF_INFERENCE_HPP
#define AIF_INFERENCE_HPP

#include <cstdint>
#include <vector>

#include "aif/genmodel.hpp"

namespace aif {

/// Mean-field variational posterior, one Categorical per hidden factor.
struct Belief {
    std::vector<Categorical> factors;
    int iterations = 0;
    double vfe = 0.0;
    bool converged = true;
    // Free energy after the initial (predictive) belief and after each sweep.
    std::vector<double> vfe_trace;

    static Belief from_priors(const std::vector<Categorical>& priors);
};

struct EfeStepTerms {
    double epistemic = 0.0;
    double pragmatic = 0.0;
};

/// Expected free energy of one policy, G = -(epistemic + pragmatic).
struct EfeBreakdown {
    double total = 0.0;
    double epistemic = 0.0; // information gain, >= 0
    double pragmatic = 0.0; // expected log-preference of predicted outcomes
    std::vector<EfeStepTerms> per_step;
};

enum class SelectionMode { argmin, sample };

struct InferenceConfig {
    int max_iterations = 16;
    double convergence_tol = 1e-6;
    double policy_precision = 16.0;
    SelectionMode selection_mode = SelectionMode::argmin;
};

using JointObservation = std::vector<int>;

/// Predictive prior for one factor: pushes the previous posterior through B
/// under the chosen action level.
Categorical propagate_factor(const GenerativeModel& gm, std::size_t factor,
                             const Categorical& prev, const JointAction& action);

/// Variational state inference: predictive priors from (prior_belief,
/// prev_action), then coordinate-ascent sweeps over factor posteriors until
/// the max belief change drops below tol. Non-convergence is flagged, not
/// thrown.
Belief infer_states(const GenerativeModel& gm, const Belief& prior_belief,
                    const JointAction& prev_action, const JointObservation& obs,
                    const InferenceConfig& cfg);

/// Exact Bayes over the enumerated joint state space; oracle for
/// infer_states. Returns the joint posterior and per-factor marginals.
struct ExactPosterior {
    std::vector<double> joint; // indexed like joint states, last factor fastest
    std::vector<Categorical> marginals;
};
ExactPosterior exact_posterior(const GenerativeModel& gm, const Belief& prior_belief,
                               const JointAction& prev_action,
                               const JointObservation& obs,
                               std::size_t joint_cap = 1000000);

/// Posterior over the context factor given a signal observation, using the
/// likelihood marginalized over the other factors' current beliefs.
Categorical infer_context(const GenerativeModel& gm, const Belief& belief,
                          int ctx_obs, std::size_t context_factor = 1,
                          std::size_t signal_modality = 2);

EfeBreakdown expected_free_energy(const GenerativeModel& gm, const Belief& belief,
                                  const Policy& policy);

struct PolicyPosterior {
    Categorical q;
    std::vector<EfeBreakdown> breakdowns;
};

/// Scores every policy by EFE and returns q(pi) = softmax(-gamma * G).
/// Shared action prefixes are evaluated once.
PolicyPosterior infer_policies(const GenerativeModel& gm, const Belief& belief,
                               const std::vector<Policy>& policies,
                               const InferenceConfig& cfg);

JointAction select_action(const Categorical& q_pi, const std::vector<Policy>& policies,
                          const InferenceConfig& cfg, std::uint64_t rng_seed);

} // namespace aif

#endif
