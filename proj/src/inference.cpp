#include "aif/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

namespace aif {

namespace {

// Odometer over joint factor levels; last factor varies fastest, matching
// Cpt::condition_index.
struct JointIter {
    const ModelSpec& spec;
    std::vector<int> digits;
    std::size_t index = 0;
    bool done = false;

    explicit JointIter(const ModelSpec& s) : spec(s), digits(s.n_factors(), 0) {}

    void advance() {
        ++index;
        for (std::size_t f = spec.n_factors(); f-- > 0;) {
            if (++digits[f] < spec.factors[f].card) return;
            digits[f] = 0;
        }
        done = true;
    }
};

int action_level(const ModelSpec& spec, std::size_t factor, const JointAction& action) {
    const int ctrl = spec.factors[factor].controlling_control;
    if (ctrl < 0) return 0;
    if (static_cast<std::size_t>(ctrl) >= action.size())
        throw DimensionError("joint action missing control factor");
    return action[static_cast<std::size_t>(ctrl)];
}

// Sum over modalities of floored log-likelihoods of the observed outcomes,
// flattened over joint conditions.
std::vector<double> observed_log_likelihood(const GenerativeModel& gm,
                                            const JointObservation& obs) {
    if (obs.size() != gm.spec.n_modalities())
        throw DimensionError("observation rank mismatch");
    const std::size_t n = gm.spec.joint_state_card();
    std::vector<double> ll(n, 0.0);
    for (std::size_t m = 0; m < gm.A.size(); ++m) {
        const int o = obs[m];
        if (o < 0 || o >= gm.spec.modalities[m].card)
            throw DimensionError("observation level out of range: " +
                                 gm.spec.modalities[m].name);
        const Cpt& a = gm.A[m];
        for (std::size_t c = 0; c < n; ++c)
            ll[c] += safe_log(a.column(c)[static_cast<std::size_t>(o)]);
    }
    return ll;
}

double expect_joint(const ModelSpec& spec, const std::vector<Categorical>& q,
                    const std::vector<double>& values) {
    double acc = 0.0;
    for (JointIter it(spec); !it.done; it.advance()) {
        double w = 1.0;
        for (std::size_t f = 0; f < q.size(); ++f) w *= q[f][static_cast<std::size_t>(it.digits[f])];
        if (w > 0.0) acc += w * values[it.index];
    }
    return acc;
}

double mean_field_vfe(const ModelSpec& spec, const std::vector<Categorical>& q,
                      const std::vector<std::vector<double>>& log_priors,
                      const std::vector<double>& log_like) {
    double vfe = 0.0;
    for (std::size_t f = 0; f < q.size(); ++f) {
        for (std::size_t s = 0; s < q[f].size(); ++s) {
            const double p = q[f][s];
            if (p > 0.0) vfe += p * (std::log(p) - log_priors[f][s]);
        }
    }
    vfe -= expect_joint(spec, q, log_like);
    return vfe;
}

} // namespace

Belief Belief::from_priors(const std::vector<Categorical>& priors) {
    Belief b;
    b.factors = priors;
    return b;
}

Categorical propagate_factor(const GenerativeModel& gm, std::size_t factor,
                             const Categorical& prev, const JointAction& action) {
    const Cpt& b = gm.B[factor];
    const int card = gm.spec.factors[factor].card;
    const int a = action_level(gm.spec, factor, action);
    std::vector<double> out(static_cast<std::size_t>(card), 0.0);
    for (int s = 0; s < card; ++s) {
        const double w = prev[static_cast<std::size_t>(s)];
        if (w == 0.0) continue;
        auto col = b.column(b.condition_index(std::vector<int>{s, a}));
        for (int s2 = 0; s2 < card; ++s2) out[static_cast<std::size_t>(s2)] += w * col[static_cast<std::size_t>(s2)];
    }
    return Categorical(std::move(out));
}

Belief infer_states(const GenerativeModel& gm, const Belief& prior_belief,
                    const JointAction& prev_action, const JointObservation& obs,
                    const InferenceConfig& cfg) {
    const std::size_t F = gm.spec.n_factors();
    if (prior_belief.factors.size() != F)
        throw DimensionError("infer_states: belief rank mismatch");

    std::vector<Categorical> priors(F);
    std::vector<std::vector<double>> log_priors(F);
    for (std::size_t f = 0; f < F; ++f) {
        priors[f] = propagate_factor(gm, f, prior_belief.factors[f], prev_action);
        log_priors[f].resize(priors[f].size());
        for (std::size_t s = 0; s < priors[f].size(); ++s)
            log_priors[f][s] = safe_log(priors[f][s]);
    }
    const std::vector<double> log_like = observed_log_likelihood(gm, obs);

    Belief out;
    out.factors = priors;
    out.vfe_trace.push_back(mean_field_vfe(gm.spec, out.factors, log_priors, log_like));

    // Coordinate ascent: each factor update is the exact minimizer given the
    // others, so the free energy trace is non-increasing sweep to sweep.
    std::vector<double> msg;
    bool converged = false;
    int sweep = 0;
    for (; sweep < cfg.max_iterations && !converged; ++sweep) {
        double max_change = 0.0;
        for (std::size_t f = 0; f < F; ++f) {
            const std::size_t card = static_cast<std::size_t>(gm.spec.factors[f].card);
            msg.assign(card, 0.0);
            for (JointIter it(gm.spec); !it.done; it.advance()) {
                double w = 1.0;
                for (std::size_t g = 0; g < F; ++g) {
                    if (g == f) continue;
                    w *= out.factors[g][static_cast<std::size_t>(it.digits[g])];
                }
                if (w > 0.0)
                    msg[static_cast<std::size_t>(it.digits[f])] += w * log_like[it.index];
            }
            for (std::size_t s = 0; s < card; ++s) msg[s] += log_priors[f][s];
            Categorical updated = softmax(msg, 1.0);
            for (std::size_t s = 0; s < card; ++s)
                max_change = std::max(max_change, std::abs(updated[s] - out.factors[f][s]));
            out.factors[f] = std::move(updated);
        }
        out.vfe_trace.push_back(mean_field_vfe(gm.spec, out.factors, log_priors, log_like));
        converged = max_change < cfg.convergence_tol;
    }

    out.iterations = sweep;
    out.converged = converged;
    out.vfe = out.vfe_trace.back();
    return out;
}

ExactPosterior exact_posterior(const GenerativeModel& gm, const Belief& prior_belief,
                               const JointAction& prev_action,
                               const JointObservation& obs, std::size_t joint_cap) {
    const std::size_t n = gm.spec.joint_state_card();
    if (n > joint_cap)
        throw OracleCapacityError("exact_posterior: joint state space too large");
    const std::size_t F = gm.spec.n_factors();

    std::vector<Categorical> priors(F);
    for (std::size_t f = 0; f < F; ++f)
        priors[f] = propagate_factor(gm, f, prior_belief.factors[f], prev_action);

    ExactPosterior post;
    post.joint.assign(n, 0.0);
    double mass = 0.0;
    for (JointIter it(gm.spec); !it.done; it.advance()) {
        double p = 1.0;
        for (std::size_t f = 0; f < F; ++f) p *= priors[f][static_cast<std::size_t>(it.digits[f])];
        for (std::size_t m = 0; m < gm.A.size(); ++m)
            p *= gm.A[m].column(it.index)[static_cast<std::size_t>(obs[m])];
        post.joint[it.index] = p;
        mass += p;
    }
    if (mass <= 0.0)
        throw DegenerateLikelihoodError("exact_posterior: observation has zero mass");
    for (double& p : post.joint) p /= mass;

    post.marginals.resize(F);
    for (std::size_t f = 0; f < F; ++f)
        post.marginals[f].probs.assign(static_cast<std::size_t>(gm.spec.factors[f].card), 0.0);
    for (JointIter it(gm.spec); !it.done; it.advance()) {
        for (std::size_t f = 0; f < F; ++f)
            post.marginals[f][static_cast<std::size_t>(it.digits[f])] += post.joint[it.index];
    }
    return post;
}

Categorical infer_context(const GenerativeModel& gm, const Belief& belief,
                          int ctx_obs, std::size_t context_factor,
                          std::size_t signal_modality) {
    const Cpt& a = gm.A[signal_modality];
    if (ctx_obs < 0 || ctx_obs >= a.outcome_card)
        throw DimensionError("infer_context: signal level out of range");
    const std::size_t F = gm.spec.n_factors();
    const std::size_t ctx_card =
        static_cast<std::size_t>(gm.spec.factors[context_factor].card);

    std::vector<double> post(ctx_card, 0.0);
    for (JointIter it(gm.spec); !it.done; it.advance()) {
        double w = 1.0;
        for (std::size_t f = 0; f < F; ++f) {
            if (f == context_factor) continue;
            w *= belief.factors[f][static_cast<std::size_t>(it.digits[f])];
        }
        post[static_cast<std::size_t>(it.digits[context_factor])] +=
            w * a.column(it.index)[static_cast<std::size_t>(ctx_obs)];
    }
    double mass = 0.0;
    for (std::size_t c = 0; c < ctx_card; ++c) {
        post[c] *= belief.factors[context_factor][c];
        mass += post[c];
    }
    if (mass <= 0.0)
        throw DegenerateLikelihoodError("infer_context: zero posterior mass");
    for (double& p : post) p /= mass;
    return Categorical(std::move(post));
}

namespace {

// Scratch space and per-step EFE terms for a fixed model.
class EfeEvaluator {
  public:
    explicit EfeEvaluator(const GenerativeModel& gm) : gm_(gm) {
        std::size_t joint_obs = 1;
        for (const auto& m : gm.spec.modalities) joint_obs *= static_cast<std::size_t>(m.card);
        q_obs_joint_.resize(joint_obs);
        p_state_.resize(gm.spec.joint_state_card());
    }

    EfeStepTerms step_terms(const std::vector<Categorical>& q) {
        const std::size_t F = gm_.spec.n_factors();
        const std::size_t M = gm_.spec.n_modalities();

        for (JointIter it(gm_.spec); !it.done; it.advance()) {
            double w = 1.0;
            for (std::size_t f = 0; f < F; ++f) w *= q[f][static_cast<std::size_t>(it.digits[f])];
            p_state_[it.index] = w;
        }

        // Ambiguity H(O|S) from the cached column entropies, and the joint
        // predicted observation distribution for H(O).
        std::fill(q_obs_joint_.begin(), q_obs_joint_.end(), 0.0);
        double h_obs_given_state = 0.0;
        for (std::size_t c = 0; c < p_state_.size(); ++c) {
            const double w = p_state_[c];
            if (w == 0.0) continue;
            for (std::size_t m = 0; m < M; ++m)
                h_obs_given_state += w * gm_.a_column_entropy[m][c];
            accumulate_obs(c, 0, 0, w);
        }
        const double h_obs = entropy(std::span<const double>(q_obs_joint_));

        double pragmatic = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const int card = gm_.spec.modalities[m].card;
            for (int o = 0; o < card; ++o) {
                double q_o = 0.0;
                for (std::size_t c = 0; c < p_state_.size(); ++c) {
                    if (p_state_[c] == 0.0) continue;
                    q_o += p_state_[c] * gm_.A[m].column(c)[static_cast<std::size_t>(o)];
                }
                pragmatic += q_o * gm_.C[m][static_cast<std::size_t>(o)];
            }
        }

        EfeStepTerms terms;
        terms.epistemic = h_obs - h_obs_given_state; // mutual information I(S;O)
        terms.pragmatic = pragmatic;
        return terms;
    }

  private:
    void accumulate_obs(std::size_t cond, std::size_t m, std::size_t flat, double w) {
        if (m == gm_.spec.n_modalities()) {
            q_obs_joint_[flat] += w;
            return;
        }
        const int card = gm_.spec.modalities[m].card;
        auto col = gm_.A[m].column(cond);
        for (int o = 0; o < card; ++o) {
            const double w2 = w * col[static_cast<std::size_t>(o)];
            if (w2 > 0.0)
                accumulate_obs(cond, m + 1, flat * static_cast<std::size_t>(card) +
                                                static_cast<std::size_t>(o), w2);
        }
    }

    const GenerativeModel& gm_;
    std::vector<double> q_obs_joint_;
    std::vector<double> p_state_;
};

EfeBreakdown finalize_breakdown(std::vector<EfeStepTerms> steps) {
    EfeBreakdown b;
    b.per_step = std::move(steps);
    for (const auto& s : b.per_step) {
        b.epistemic += s.epistemic;
        b.pragmatic += s.pragmatic;
    }
    b.total = -(b.epistemic + b.pragmatic);
    return b;
}

} // namespace

EfeBreakdown expected_free_energy(const GenerativeModel& gm, const Belief& belief,
                                  const Policy& policy) {
    if (policy.actions.size() != static_cast<std::size_t>(gm.spec.horizon))
        throw DimensionError("expected_free_energy: policy length != horizon");
    EfeEvaluator eval(gm);
    std::vector<Categorical> q = belief.factors;
    std::vector<EfeStepTerms> steps;
    steps.reserve(policy.actions.size());
    for (const auto& action : policy.actions) {
        for (std::size_t f = 0; f < q.size(); ++f)
            q[f] = propagate_factor(gm, f, q[f], action);
        steps.push_back(eval.step_terms(q));
    }
    return finalize_breakdown(std::move(steps));
}

PolicyPosterior infer_policies(const GenerativeModel& gm, const Belief& belief,
                               const std::vector<Policy>& policies,
                               const InferenceConfig& cfg) {
    if (policies.empty()) throw ParameterError("infer_policies: empty policy list");

    EfeEvaluator eval(gm);

    // Policies share action prefixes; cache the rolled-forward belief and the
    // step terms per prefix so each distinct prefix is evaluated once.
    struct PrefixState {
        std::vector<Categorical> q;
        EfeStepTerms terms;
    };
    const std::size_t per_step = gm.spec.joint_action_card();
    std::vector<std::unordered_map<std::size_t, PrefixState>> cache;

    auto action_index = [&](const JointAction& a) {
        std::size_t idx = 0;
        for (std::size_t c = 0; c < gm.spec.controls.size(); ++c) {
            if (a[c] < 0 || a[c] >= gm.spec.controls[c].card)
                throw DimensionError("infer_policies: action level out of range");
            idx = idx * static_cast<std::size_t>(gm.spec.controls[c].card) +
                  static_cast<std::size_t>(a[c]);
        }
        return idx;
    };

    PolicyPosterior out;
    out.breakdowns.resize(policies.size());
    std::vector<double> neg_g(policies.size());
    for (std::size_t k = 0; k < policies.size(); ++k) {
        const Policy& pol = policies[k];
        if (cache.size() < pol.actions.size()) cache.resize(pol.actions.size());
        std::vector<EfeStepTerms> steps;
        steps.reserve(pol.actions.size());
        std::size_t prefix = 0;
        const std::vector<Categorical>* q_prev = &belief.factors;
        for (std::size_t t = 0; t < pol.actions.size(); ++t) {
            prefix = prefix * per_step + action_index(pol.actions[t]);
            auto [it, inserted] = cache[t].try_emplace(prefix);
            if (inserted) {
                PrefixState st;
                st.q.resize(q_prev->size());
                for (std::size_t f = 0; f < q_prev->size(); ++f)
                    st.q[f] = propagate_factor(gm, f, (*q_prev)[f], pol.actions[t]);
                st.terms = eval.step_terms(st.q);
                it->second = std::move(st);
            }
            steps.push_back(it->second.terms);
            q_prev = &it->second.q;
        }
        out.breakdowns[k] = finalize_breakdown(std::move(steps));
        neg_g[k] = -out.breakdowns[k].total;
    }

    out.q = softmax(neg_g, cfg.policy_precision);
    return out;
}

JointAction select_action(const Categorical& q_pi, const std::vector<Policy>& policies,
                          const InferenceConfig& cfg, std::uint64_t rng_seed) {
    if (q_pi.size() != policies.size())
        throw DimensionError("select_action: q_pi length != policy count");

    if (cfg.selection_mode == SelectionMode::argmin) {
        // max_element returns the first maximum: lowest index wins ties.
        return policies[q_pi.argmax()].actions.front();
    }

    // Marginal over first actions, in first-appearance order.
    std::vector<JointAction> firsts;
    std::vector<double> weights;
    std::map<JointAction, std::size_t> seen;
    for (std::size_t k = 0; k < policies.size(); ++k) {
        const JointAction& a = policies[k].actions.front();
        auto [it, inserted] = seen.try_emplace(a, firsts.size());
        if (inserted) {
            firsts.push_back(a);
            weights.push_back(0.0);
        }
        weights[it->second] += q_pi[k];
    }

    std::mt19937_64 eng(rng_seed);
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    double total = 0.0;
    for (double w : weights) total += w;
    double acc = 0.0;
    for (std::size_t i = 0; i < firsts.size(); ++i) {
        acc += weights[i] / total;
        if (u < acc) return firsts[i];
    }
    return firsts.back();
}

} // namespace aif
