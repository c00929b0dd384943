#include "aif/loop.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "aif/market.hpp"

namespace aif {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

PreferenceUpdate update_preferences(const PricePredictor& predict_price,
                                    const FirmModelParams& params, double price_slope_b,
                                    const std::vector<double>& opponents_last_sales) {
    const int pcard = params.max_production + 1;
    const int scard = params.capacity + 1;

    PreferenceUpdate out;
    out.price_by_production.resize(static_cast<std::size_t>(pcard));
    std::vector<double> features;
    features.reserve(1 + opponents_last_sales.size());
    for (int p = 0; p < pcard; ++p) {
        features.clear();
        features.push_back(static_cast<double>(p));
        features.insert(features.end(), opponents_last_sales.begin(),
                        opponents_last_sales.end());
        out.price_by_production[static_cast<std::size_t>(p)] = predict_price(features);
    }

    // Least-squares line through the per-production estimates extends the
    // price curve over the full sales support. The slope is the firm's known
    // price sensitivity; a free slope is not identifiable from the single
    // operating point the stream visits and wobbles the profit vertex. A
    // stone-cold predictor answers 0 everywhere, which means "no price
    // knowledge", not "prices rise as sales fall".
    bool cold = true;
    for (double p_hat : out.price_by_production)
        if (p_hat != 0.0) cold = false;
    const double slope = cold ? 0.0 : -price_slope_b;
    double intercept = 0.0;
    for (int p = 0; p < pcard; ++p)
        intercept += out.price_by_production[static_cast<std::size_t>(p)] -
                     slope * static_cast<double>(p);
    intercept /= static_cast<double>(pcard);

    out.C.resize(4);
    out.C[0].resize(static_cast<std::size_t>(scard));
    for (int s = 0; s < scard; ++s) {
        const double price = intercept + slope * static_cast<double>(s);
        out.C[0][static_cast<std::size_t>(s)] =
            params.kappa * price * static_cast<double>(s);
    }
    out.C[1].resize(static_cast<std::size_t>(pcard));
    for (int q = 0; q < pcard; ++q)
        out.C[1][static_cast<std::size_t>(q)] =
            -params.kappa * params.unit_cost * static_cast<double>(q);
    out.C[2].resize(4);
    for (int o = 0; o < 4; ++o)
        out.C[2][static_cast<std::size_t>(o)] =
            params.kappa * params.occupancy_cost.at(static_cast<std::size_t>(o));
    out.C[3] = {0.0, params.kappa * params.analysis_cost};
    return out;
}

AgentRuntime::AgentRuntime(FirmModelParams p, SrpConfig srp_cfg, std::size_t n_firms,
                           std::uint64_t ensemble_seed, int policy_cap)
    : params(p),
      gm(build_firm_model(p)),
      policies(enumerate_policies(gm.spec, policy_cap)),
      belief(Belief::from_priors(gm.D)),
      ensemble(srp_cfg, n_firms, ensemble_seed),
      br_current(p.br_target),
      unit_cost(p.unit_cost),
      last_action({0, kActionDoNothing}),
      last_obs(4, 0),
      opponents_last_sales(n_firms - 1, 0.0) {}

bool maybe_recompute_br(AgentRuntime& agent, double a_hat_new) {
    double a_old = agent.a_hat_old;
    if (a_old <= 0.0) {
        std::cerr << "warning: non-positive a_hat_old, substituting epsilon\n";
        a_old = 1e-9;
    }
    const bool recompute = std::abs(a_hat_new - a_old) / a_old > 0.1;
    if (recompute) {
        double opponents = 0.0;
        for (double s : agent.opponents_last_sales) opponents += s;
        const double br_real =
            best_response(a_hat_new, agent.market_b, agent.unit_cost, opponents);
        agent.br_current = std::clamp(static_cast<int>(std::lround(br_real)), 0,
                                      agent.params.capacity);
        rebuild_for_br(agent.gm, agent.params, agent.br_current);
    }
    agent.a_hat_old = a_hat_new;
    return recompute;
}

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
    RunResult result;
    try {
        config.validate();
        const std::size_t n = config.firms.size();
        const double a0 = config.market.a_schedule.at(0);

        std::vector<double> costs(n);
        for (std::size_t i = 0; i < n; ++i) costs[i] = config.firms[i].cost;
        const std::vector<double> nash = nash_quantities(a0, config.market.b, costs);

        SrpConfig srp_cfg;
        srp_cfg.n_learners = config.srp.learners;
        srp_cfg.max_features = config.srp.max_features;
        srp_cfg.poisson_lambda = config.srp.poisson_lambda;
        srp_cfg.adwin_delta = config.srp.adwin_delta;
        srp_cfg.adwin_window_cap = config.srp.window_cap;

        const InferenceConfig icfg = config.inference_config();

        std::vector<AgentRuntime> agents;
        agents.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            FirmModelParams p = config.firm_model_params(i);
            p.br_target = std::clamp(static_cast<int>(std::lround(nash[i])), 0,
                                     config.market.capacity);
            AgentRuntime agent(p, srp_cfg, n, mix_seed(seed, 0x5EED0000ULL + i),
                               config.agent.policy_cap);
            agent.market_b = config.market.b;
            agent.a_hat_old = a0;
            // Cold start on the null instance: zero sales at the assumed
            // maximum price.
            const Instance null_instance{std::vector<double>(n, 0.0), a0};
            for (int k = 0; k < config.srp.pretrain_count; ++k)
                agent.ensemble.pretrain(null_instance);
            agents.push_back(std::move(agent));
        }

        std::vector<FirmGroundTruth> gp(n);
        for (std::size_t i = 0; i < n; ++i) gp[i] = FirmGroundTruth{0, costs[i]};

        // Initial observations: nothing produced or sold yet; the stock
        // signal is a noisy reading of the empty warehouse.
        {
            std::mt19937_64 init_eng(mix_seed(seed, 0x1A171ULL));
            for (std::size_t i = 0; i < n; ++i) {
                const Categorical noisy = discretized_gaussian(
                    static_cast<double>(signal_band(0, config.market.capacity)),
                    config.market.signal_sigma, 4);
                const double u = static_cast<double>(init_eng() >> 11) * 0x1.0p-53;
                double acc = 0.0;
                int level = 3;
                for (int o = 0; o < 4; ++o) {
                    acc += noisy[static_cast<std::size_t>(o)];
                    if (u < acc) {
                        level = o;
                        break;
                    }
                }
                agents[i].last_obs = {0, 0, level, 0};
            }
        }

        RunDiagnostics& diag = result.diag;
        for (int t = 0; t < config.market.horizon_steps; ++t) {
            std::vector<int> productions(n);
            std::vector<bool> analyses(n);
            std::vector<PreferenceUpdate> prefs(n);

            for (std::size_t i = 0; i < n; ++i) {
                AgentRuntime& agent = agents[i];
                agent.belief = infer_states(agent.gm, agent.belief, agent.last_action,
                                            agent.last_obs, icfg);
                for (std::size_t k = 1; k < agent.belief.vfe_trace.size(); ++k) {
                    diag.max_vfe_increase =
                        std::max(diag.max_vfe_increase, agent.belief.vfe_trace[k] -
                                                            agent.belief.vfe_trace[k - 1]);
                }
                if (!agent.belief.converged) ++diag.non_converged_calls;

                agent.belief.factors[1] =
                    infer_context(agent.gm, agent.belief, agent.last_obs[2]);

                const SrpEnsemble& ens = agent.ensemble;
                prefs[i] = update_preferences(
                    [&ens](const std::vector<double>& f) { return ens.predict(f); },
                    agent.params, agent.market_b, agent.opponents_last_sales);
                agent.gm.C = prefs[i].C;

                const PolicyPosterior pol =
                    infer_policies(agent.gm, agent.belief, agent.policies, icfg);
                const JointAction action = select_action(
                    pol.q, agent.policies, icfg,
                    mix_seed(seed, (static_cast<std::uint64_t>(i) << 32) |
                                       static_cast<std::uint64_t>(t)));
                productions[i] = action[0];
                analyses[i] = action[1] == kActionAnalysis;
                agent.last_action = action;
            }

            const StepOutcome outcome =
                step_market(gp, productions, analyses, t, config.market,
                            mix_seed(mix_seed(seed, 0x6BULL),
                                     static_cast<std::uint64_t>(t)));
            diag.total_overflow_discarded += outcome.overflow_discarded;

            StepRecord record;
            record.t = t;
            record.price = outcome.price;
            record.customers = outcome.customers;
            record.firms.resize(n);

            for (std::size_t i = 0; i < n; ++i) {
                AgentRuntime& agent = agents[i];

                // Feature order: own sold quantity first, then opponents'.
                std::vector<double> sales_features;
                sales_features.reserve(n);
                sales_features.push_back(static_cast<double>(outcome.firms[i].sold));
                for (std::size_t j = 0; j < n; ++j) {
                    if (j != i)
                        sales_features.push_back(static_cast<double>(outcome.firms[j].sold));
                }
                agent.ensemble.learn(Instance{sales_features, outcome.price});

                // Intercept implied by the observed price: offered quantity is
                // public (sold plus stored), so a = P + b * total offered is an
                // exact inversion of the pricing function. The ensemble's
                // null-sales probe cannot track the demand jump on a 25-step
                // stream: the zero-sales corner stops receiving data once the
                // market clears, and piecewise-constant leaves have no slope
                // to extrapolate with.
                double total_offered = 0.0;
                for (const auto& firm : outcome.firms)
                    total_offered += firm.sold + firm.warehouse_after;
                const double a_hat_new =
                    outcome.price + agent.market_b * total_offered;
                const bool recomputed = maybe_recompute_br(agent, a_hat_new);

                std::size_t opp = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j != i)
                        agent.opponents_last_sales[opp++] =
                            static_cast<double>(outcome.firms[j].sold);
                }

                FirmStepRecord& f = record.firms[i];
                f.produced = outcome.firms[i].produced;
                f.analysis = outcome.firms[i].analysis_performed;
                f.sold = outcome.firms[i].sold;
                f.warehouse = outcome.firms[i].warehouse_after;
                f.inferred_warehouse = agent.belief.factors[0].mean();
                f.inferred_context = static_cast<int>(agent.belief.factors[1].argmax());
                f.epistemic_state = static_cast<int>(agent.belief.factors[2].argmax());
                f.predicted_price =
                    prefs[i].price_by_production[static_cast<std::size_t>(productions[i])];
                f.br_current = agent.br_current;
                f.br_recomputed = recomputed;

                // Next-step observations; the sales channel saturates at the
                // top of its support.
                agent.last_obs = {
                    std::min(outcome.firms[i].sold, config.market.capacity),
                    outcome.firms[i].produced,
                    outcome.firms[i].signal_level,
                    outcome.firms[i].analysis_performed ? 1 : 0,
                };
            }
            result.records.push_back(std::move(record));
        }
        result.completed = true;
    } catch (const std::exception& e) {
        result.completed = false;
        result.error = e.what();
    }
    return result;
}

} // namespace aif
