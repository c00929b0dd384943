#include "aif/genmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace aif {

std::size_t ModelSpec::joint_state_card() const {
    std::size_t n = 1;
    for (const auto& f : factors) n *= static_cast<std::size_t>(f.card);
    return n;
}

std::size_t ModelSpec::joint_action_card() const {
    std::size_t n = 1;
    for (const auto& c : controls) n *= static_cast<std::size_t>(c.card);
    return n;
}

void ModelSpec::validate() const {
    std::set<std::string> names;
    for (const auto& f : factors) {
        if (f.card < 1) throw ParameterError("ModelSpec: factor cardinality < 1");
        if (!names.insert(f.name).second)
            throw ParameterError("ModelSpec: duplicate factor name " + f.name);
        if (f.controlling_control >= static_cast<int>(controls.size()))
            throw ParameterError("ModelSpec: control index out of range for " + f.name);
    }
    for (const auto& m : modalities) {
        if (m.card < 1) throw ParameterError("ModelSpec: modality cardinality < 1");
        if (!names.insert(m.name).second)
            throw ParameterError("ModelSpec: duplicate modality name " + m.name);
    }
    for (const auto& c : controls) {
        if (c.card < 1) throw ParameterError("ModelSpec: control cardinality < 1");
    }
    if (horizon < 1) throw ParameterError("ModelSpec: horizon < 1");
}

void GenerativeModel::refresh_entropy_cache() {
    a_column_entropy.resize(A.size());
    for (std::size_t m = 0; m < A.size(); ++m) {
        const std::size_t n = A[m].n_conditions();
        a_column_entropy[m].resize(n);
        for (std::size_t c = 0; c < n; ++c)
            a_column_entropy[m][c] = entropy(A[m].column(c));
    }
}

void GenerativeModel::validate(double tol) const {
    spec.validate();
    if (A.size() != spec.n_modalities())
        throw DimensionError("GenerativeModel: A count != modalities");
    if (B.size() != spec.n_factors())
        throw DimensionError("GenerativeModel: B count != factors");
    if (C.size() != spec.n_modalities())
        throw DimensionError("GenerativeModel: C count != modalities");
    if (D.size() != spec.n_factors())
        throw DimensionError("GenerativeModel: D count != factors");

    for (std::size_t m = 0; m < A.size(); ++m) {
        if (A[m].outcome_card != spec.modalities[m].card)
            throw DimensionError("A outcome cardinality mismatch: " + spec.modalities[m].name);
        if (A[m].condition_cards.size() != spec.n_factors())
            throw DimensionError("A condition rank mismatch: " + spec.modalities[m].name);
        for (std::size_t f = 0; f < spec.n_factors(); ++f) {
            if (A[m].condition_cards[f] != spec.factors[f].card)
                throw DimensionError("A condition cardinality mismatch: " + spec.modalities[m].name);
        }
        A[m].validate(tol);
        if (C[m].size() != static_cast<std::size_t>(spec.modalities[m].card))
            throw DimensionError("C length mismatch: " + spec.modalities[m].name);
        for (double u : C[m]) {
            if (!std::isfinite(u)) throw ParameterError("C entry not finite");
        }
    }
    for (std::size_t f = 0; f < B.size(); ++f) {
        const int card = spec.factors[f].card;
        const int ctrl = spec.factors[f].controlling_control;
        const int action_card = ctrl < 0 ? 1 : spec.controls[static_cast<std::size_t>(ctrl)].card;
        if (B[f].outcome_card != card ||
            B[f].condition_cards != std::vector<int>{card, action_card})
            throw DimensionError("B shape mismatch: " + spec.factors[f].name);
        B[f].validate(tol);
        if (!D[f].is_valid(tol) || D[f].size() != static_cast<std::size_t>(card))
            throw NormalizationError("D invalid for factor " + spec.factors[f].name);
    }
}

ContextMap default_context_map() {
    return ContextMap{{1.0, 0.8, 0.2, 0.0}};
}

int signal_band(int warehouse, int capacity) {
    const double occ = static_cast<double>(warehouse) / static_cast<double>(capacity);
    if (occ <= 0.30) return 0;
    if (occ <= 0.50) return 1;
    if (occ <= 0.80) return 2;
    return 3;
}

Cpt build_sales_likelihood(int context, double sigma, int br_target,
                           const FirmModelParams& params) {
    if (sigma <= 0.0) throw ParameterError("build_sales_likelihood: sigma must be > 0");
    if (br_target < 0 || br_target > params.capacity)
        throw ParameterError("build_sales_likelihood: br_target out of range");
    const int levels = params.capacity + 1;
    const int shift = context == kContextReduce ? params.context_shift_sales : 0;
    Cpt cpt(levels, {levels});
    for (int w = 0; w < levels; ++w) {
        // An empty warehouse is most plausible when sales hit the BR target;
        // each unsold unit shifts the expected sales down by one.
        const double center = static_cast<double>(br_target + shift - w);
        Categorical col = discretized_gaussian(center, sigma, levels);
        cpt.set_column(static_cast<std::size_t>(w), col.probs);
    }
    return cpt;
}

Cpt build_production_likelihood(int context, double sigma,
                                const FirmModelParams& params) {
    if (sigma <= 0.0) throw ParameterError("build_production_likelihood: sigma must be > 0");
    const int levels = params.capacity + 1;
    const int prod_levels = params.max_production + 1;
    const int shift = context == kContextReduce ? params.context_shift_production : 0;
    Cpt cpt(prod_levels, {levels});
    for (int w = 0; w < levels; ++w) {
        const double center =
            static_cast<double>(params.max_production) *
                (1.0 - static_cast<double>(w) / static_cast<double>(params.capacity)) -
            static_cast<double>(shift);
        Categorical col = discretized_gaussian(center, sigma, prod_levels);
        cpt.set_column(static_cast<std::size_t>(w), col.probs);
    }
    return cpt;
}

Cpt fuse_context_likelihood(const Cpt& p_o_given_w, const ContextMap& ctx_map,
                            int context) {
    if (ctx_map.p_acceptable_given_obs.size() !=
        static_cast<std::size_t>(p_o_given_w.outcome_card))
        throw DimensionError("fuse_context_likelihood: map length mismatch");
    Cpt out = p_o_given_w;
    for (std::size_t c = 0; c < out.n_conditions(); ++c) {
        auto col = out.column(c);
        double mass = 0.0;
        for (int o = 0; o < out.outcome_card; ++o) {
            // Floor the map weight so that a hard-zero context weight meeting
            // a deterministic channel cannot zero out the whole column.
            const double w = ctx_map.weight(o, context) + kLogFloor;
            col[static_cast<std::size_t>(o)] *= w;
            mass += col[static_cast<std::size_t>(o)];
        }
        if (mass <= 0.0)
            throw DegenerateLikelihoodError("fuse_context_likelihood: zero column mass");
        for (double& p : col) p /= mass;
    }
    return out;
}

Cpt build_signal_likelihood(int epistemic, int context, double sigma,
                            const ContextMap& ctx_map, const FirmModelParams& params) {
    if (sigma <= 0.0) throw ParameterError("build_signal_likelihood: sigma must be > 0");
    const int levels = params.capacity + 1;
    const int bands = 4;
    const double sigma_eff = epistemic == kEpistemicAnalyzed ? 0.01 : sigma;
    Cpt base(bands, {levels});
    for (int w = 0; w < levels; ++w) {
        const int band = signal_band(w, params.capacity);
        Categorical col = discretized_gaussian(static_cast<double>(band), sigma_eff, bands);
        base.set_column(static_cast<std::size_t>(w), col.probs);
    }
    return fuse_context_likelihood(base, ctx_map, context);
}

Cpt build_warehouse_transition(int br, double sigma_b, const FirmModelParams& params) {
    if (sigma_b <= 0.0) throw ParameterError("build_warehouse_transition: sigma must be > 0");
    if (br < 0) throw ParameterError("build_warehouse_transition: br must be >= 0");
    const int levels = params.capacity + 1;
    const int prod_levels = params.max_production + 1;
    Cpt cpt(levels, {levels, prod_levels});
    for (int w = 0; w < levels; ++w) {
        for (int u = 0; u < prod_levels; ++u) {
            // Expected sales absorb min(BR, available); the rest is stocked.
            const int available = w + u;
            const int expected = std::clamp(available - std::min(br, available), 0, params.capacity);
            Categorical col =
                discretized_gaussian(static_cast<double>(expected), sigma_b, levels);
            cpt.set_column(cpt.condition_index(std::vector<int>{w, u}), col.probs);
        }
    }
    return cpt;
}

Cpt build_context_transition() {
    Cpt cpt(2, {2, 1});
    std::fill(cpt.table.begin(), cpt.table.end(), 0.5);
    return cpt;
}

Cpt build_epistemic_transition() {
    Cpt cpt(2, {2, 2});
    for (int e = 0; e < 2; ++e) {
        for (int a = 0; a < 2; ++a) {
            const int next = a == kActionAnalysis ? kEpistemicAnalyzed : kEpistemicNotAnalyzed;
            Categorical col = Categorical::delta(2, static_cast<std::size_t>(next));
            cpt.set_column(cpt.condition_index(std::vector<int>{e, a}), col.probs);
        }
    }
    return cpt;
}

Cpt build_production_record_transition(const FirmModelParams& params) {
    const int pcard = params.max_production + 1;
    Cpt cpt(pcard, {pcard, pcard});
    for (int p = 0; p < pcard; ++p) {
        for (int u = 0; u < pcard; ++u) {
            Categorical col = Categorical::delta(static_cast<std::size_t>(pcard),
                                                 static_cast<std::size_t>(u));
            cpt.set_column(cpt.condition_index(std::vector<int>{p, u}), col.probs);
        }
    }
    return cpt;
}

std::vector<Categorical> build_initial_prior(const FirmModelParams& params) {
    return {
        Categorical::delta(static_cast<std::size_t>(params.capacity + 1), 0),
        Categorical::delta(2, kContextAcceptable),
        Categorical::delta(2, kEpistemicNotAnalyzed),
        Categorical::delta(static_cast<std::size_t>(params.max_production + 1), 0),
    };
}

std::vector<Policy> enumerate_policies(const ModelSpec& spec, int policy_cap) {
    if (spec.horizon < 1) throw ParameterError("enumerate_policies: horizon < 1");
    const std::size_t per_step = spec.joint_action_card();
    std::size_t count = 1;
    for (int t = 0; t < spec.horizon; ++t) {
        count *= per_step;
        if (count > static_cast<std::size_t>(policy_cap))
            throw PolicyExplosionError("enumerate_policies: policy count exceeds cap");
    }

    // Joint action index: first control slowest. Policy index: first timestep
    // slowest. Keeps tie-breaking by index deterministic.
    std::vector<JointAction> joint_actions(per_step);
    for (std::size_t a = 0; a < per_step; ++a) {
        JointAction act(spec.controls.size());
        std::size_t rem = a;
        for (std::size_t c = spec.controls.size(); c-- > 0;) {
            const auto card = static_cast<std::size_t>(spec.controls[c].card);
            act[c] = static_cast<int>(rem % card);
            rem /= card;
        }
        joint_actions[a] = std::move(act);
    }

    std::vector<Policy> policies(count);
    for (std::size_t k = 0; k < count; ++k) {
        Policy pol;
        pol.actions.resize(static_cast<std::size_t>(spec.horizon));
        std::size_t rem = k;
        for (std::size_t t = static_cast<std::size_t>(spec.horizon); t-- > 0;) {
            pol.actions[t] = joint_actions[rem % per_step];
            rem /= per_step;
        }
        policies[k] = std::move(pol);
    }
    return policies;
}

GenerativeModel build_firm_model(const FirmModelParams& params) {
    const int wcard = params.capacity + 1;
    const int pcard = params.max_production + 1;

    GenerativeModel gm;
    gm.spec.factors = {
        {"warehouse", wcard, 0},
        {"context", 2, -1},
        {"epistemic", 2, 1},
        {"production_record", pcard, 0}, // shares the production control with warehouse
    };
    gm.spec.modalities = {
        {"sales", wcard},
        {"production", pcard},
        {"signal", 4},
        {"analysis_flag", 2},
    };
    gm.spec.controls = {
        {"production", pcard},
        {"analysis", 2},
    };
    gm.spec.horizon = params.horizon;

    const ContextMap ctx_map = default_context_map();

    // Sales columns are keyed on the production record: selling what was
    // produced leaves the warehouse where it ended, so the center is the
    // record minus the stock level. Shortfall mass is absorbed at zero sales
    // rather than renormalized upward (nothing can be sold from an empty
    // market position), and the context shift stays out of this channel; the
    // fused signal carries the context evidence.
    std::vector<Cpt> sales_by_p;
    for (int p = 0; p < pcard; ++p) {
        Cpt slice(wcard, {wcard});
        for (int w = 0; w < wcard; ++w) {
            slice.set_column(static_cast<std::size_t>(w),
                             discretized_gaussian_absorbing(
                                 static_cast<double>(p - w), params.sales_sigma, wcard)
                                 .probs);
        }
        sales_by_p.push_back(std::move(slice));
    }
    std::vector<Cpt> prod_by_ctx;
    for (int c = 0; c < 2; ++c) {
        prod_by_ctx.push_back(
            build_production_likelihood(c, params.production_sigma, params));
    }
    std::vector<std::vector<Cpt>> signal_by_epi_ctx(2);
    for (int e = 0; e < 2; ++e) {
        for (int c = 0; c < 2; ++c) {
            signal_by_epi_ctx[static_cast<std::size_t>(e)].push_back(
                build_signal_likelihood(e, c, params.signal_sigma, ctx_map, params));
        }
    }

    const std::vector<int> cond = {wcard, 2, 2, pcard};
    Cpt a_sales(wcard, cond);
    Cpt a_prod(pcard, cond);
    Cpt a_signal(4, cond);
    Cpt a_analysis(2, cond);
    for (int w = 0; w < wcard; ++w) {
        for (int c = 0; c < 2; ++c) {
            for (int e = 0; e < 2; ++e) {
                for (int p = 0; p < pcard; ++p) {
                    const std::size_t ci =
                        a_sales.condition_index(std::vector<int>{w, c, e, p});
                    a_sales.set_column(ci, sales_by_p[static_cast<std::size_t>(p)].column(
                                               static_cast<std::size_t>(w)));
                    a_prod.set_column(
                        ci, prod_by_ctx[static_cast<std::size_t>(c)].column(
                                static_cast<std::size_t>(w)));
                    a_signal.set_column(
                        ci, signal_by_epi_ctx[static_cast<std::size_t>(e)]
                                [static_cast<std::size_t>(c)]
                                    .column(static_cast<std::size_t>(w)));
                    a_analysis.set_column(
                        ci, Categorical::delta(2, static_cast<std::size_t>(e)).probs);
                }
            }
        }
    }
    gm.A = {std::move(a_sales), std::move(a_prod), std::move(a_signal),
            std::move(a_analysis)};

    gm.B = {
        build_warehouse_transition(params.br_target, params.transition_sigma, params),
        build_context_transition(),
        build_epistemic_transition(),
        build_production_record_transition(params),
    };

    gm.C.resize(4);
    gm.C[0].assign(static_cast<std::size_t>(wcard), 0.0);
    gm.C[1].resize(static_cast<std::size_t>(pcard));
    for (int q = 0; q < pcard; ++q)
        gm.C[1][static_cast<std::size_t>(q)] =
            -params.kappa * params.unit_cost * static_cast<double>(q);
    gm.C[2].resize(4);
    for (int o = 0; o < 4; ++o)
        gm.C[2][static_cast<std::size_t>(o)] =
            params.kappa * params.occupancy_cost.at(static_cast<std::size_t>(o));
    gm.C[3] = {0.0, params.kappa * params.analysis_cost};

    gm.D = build_initial_prior(params);
    gm.validate();
    gm.refresh_entropy_cache();
    return gm;
}

void rebuild_for_br(GenerativeModel& gm, const FirmModelParams& params, int br) {
    gm.B[0] = build_warehouse_transition(br, params.transition_sigma, params);
}

} // namespace aif
