#include "aif/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aif {

using nlohmann::json;

InferenceConfig ExperimentConfig::inference_config() const {
    InferenceConfig icfg;
    icfg.max_iterations = agent.max_iterations;
    icfg.convergence_tol = agent.convergence_tol;
    icfg.policy_precision = agent.policy_precision;
    if (agent.selection_mode == "argmin") {
        icfg.selection_mode = SelectionMode::argmin;
    } else if (agent.selection_mode == "sample") {
        icfg.selection_mode = SelectionMode::sample;
    } else {
        throw ConfigError("selection_mode must be argmin or sample");
    }
    return icfg;
}

FirmModelParams ExperimentConfig::firm_model_params(std::size_t firm_index) const {
    const FirmConfig& firm = firms.at(firm_index);
    FirmModelParams p;
    p.capacity = market.capacity;
    p.max_production = market.max_production;
    p.sales_sigma = firm.sales_sigma.value_or(agent.sales_sigma);
    p.production_sigma = agent.production_sigma;
    p.signal_sigma = agent.signal_sigma;
    p.transition_sigma = agent.transition_sigma;
    p.context_shift_sales = agent.context_shift_sales;
    p.context_shift_production = agent.context_shift_production;
    p.horizon = agent.policy_horizon;
    p.kappa = agent.kappa;
    p.occupancy_cost = agent.occupancy_cost;
    p.analysis_cost = agent.analysis_cost;
    p.unit_cost = firm.cost;
    return p;
}

void ExperimentConfig::validate() const {
    if (firms.empty()) throw ConfigError("config: at least one firm required");
    if (market.b <= 0.0) throw ConfigError("config: market.b must be > 0");
    if (market.capacity < 1) throw ConfigError("config: capacity must be >= 1");
    if (market.max_production < 1) throw ConfigError("config: max_production must be >= 1");
    if (market.horizon_steps < 1) throw ConfigError("config: horizon_steps must be >= 1");
    if (market.signal_sigma <= 0.0) throw ConfigError("config: market.signal_sigma must be > 0");
    if (market.a_schedule.knots.empty() || market.customers_schedule.knots.empty())
        throw ConfigError("config: schedules must be non-empty");
    for (const FirmConfig& f : firms) {
        if (f.cost < 0.0) throw ConfigError("config: firm cost must be >= 0");
        if (f.sales_sigma && *f.sales_sigma <= 0.0)
            throw ConfigError("config: firm sales_sigma must be > 0");
    }
    if (agent.kappa <= 0.0) throw ConfigError("config: kappa must be > 0");
    if (agent.sales_sigma <= 0.0 || agent.production_sigma <= 0.0 ||
        agent.signal_sigma <= 0.0 || agent.transition_sigma <= 0.0)
        throw ConfigError("config: agent sigmas must be > 0");
    if (agent.policy_horizon < 1) throw ConfigError("config: policy_horizon must be >= 1");
    if (agent.policy_precision <= 0.0)
        throw ConfigError("config: policy_precision must be > 0");
    if (agent.max_iterations < 1) throw ConfigError("config: max_iterations must be >= 1");
    if (agent.convergence_tol <= 0.0)
        throw ConfigError("config: convergence_tol must be > 0");
    if (agent.occupancy_cost.size() != 4)
        throw ConfigError("config: occupancy_cost must have 4 entries");
    if (agent.selection_mode != "argmin" && agent.selection_mode != "sample")
        throw ConfigError("config: selection_mode must be argmin or sample");
    if (srp.learners < 1) throw ConfigError("config: srp.learners must be >= 1");
    if (srp.max_features < 1) throw ConfigError("config: srp.max_features must be >= 1");
    if (srp.poisson_lambda < 0.0) throw ConfigError("config: srp.poisson_lambda must be >= 0");
    if (srp.adwin_delta <= 0.0 || srp.adwin_delta >= 1.0)
        throw ConfigError("config: srp.adwin_delta must be in (0,1)");
    if (srp.pretrain_count < 0) throw ConfigError("config: srp.pretrain_count must be >= 0");
}

namespace {

StepSchedule schedule(std::initializer_list<StepSchedule::Knot> knots) {
    StepSchedule s;
    s.knots = knots;
    return s;
}

ExperimentConfig base_defaults() {
    ExperimentConfig cfg;
    cfg.market.a_schedule = schedule({{0, 30.0}, {15, 45.0}});
    cfg.market.b = 1.0;
    cfg.market.capacity = 10;
    cfg.market.max_production = 6;
    cfg.market.horizon_steps = 25;
    cfg.market.signal_sigma = 1.0;
    cfg.market.price_on_sold = false;
    return cfg;
}

} // namespace

ExperimentConfig scenario_defaults(const std::string& scenario_id) {
    ExperimentConfig cfg = base_defaults();
    cfg.scenario = scenario_id;
    if (scenario_id == "duopoly-reference") {
        cfg.market.customers_schedule = schedule({{0, 10}, {6, 6}, {11, 4}, {15, 15}});
        cfg.firms = {{16.0, {}}, {17.0, {}}};
    } else if (scenario_id == "duopoly-precision-1.5") {
        cfg.market.customers_schedule = schedule({{0, 10}, {6, 6}, {11, 4}, {15, 15}});
        cfg.firms = {{16.0, {}}, {17.0, 1.5}};
    } else if (scenario_id == "duopoly-simplified-precision-0.6") {
        cfg.market.customers_schedule = schedule({{0, 10}, {11, 6}, {15, 15}});
        cfg.firms = {{16.0, {}}, {17.0, 0.6}};
    } else if (scenario_id == "three-firm-reference") {
        cfg.market.customers_schedule = schedule({{0, 15}, {6, 12}, {11, 9}, {15, 20}});
        // Costs chosen so the one-shot equilibrium is (5, 4, 3) before the
        // demand surge and (8.75, 7.75, 6.75) after it.
        cfg.firms = {{13.0, {}}, {14.0, {}}, {15.0, {}}};
    } else if (scenario_id == "three-firm-precision-0.6") {
        cfg.market.customers_schedule = schedule({{0, 15}, {6, 12}, {11, 9}, {15, 20}});
        cfg.firms = {{13.0, {}}, {14.0, 0.6}, {15.0, {}}};
    } else if (scenario_id == "custom") {
        cfg.market.customers_schedule.knots.clear(); // must come from the file
    } else {
        throw ConfigError("unknown scenario: " + scenario_id);
    }
    return cfg;
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

StepSchedule parse_schedule(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty())
        throw ConfigError("config: " + where + " must be a non-empty array");
    StepSchedule s;
    for (const auto& knot : arr) {
        if (!knot.is_array() || knot.size() != 2)
            throw ConfigError("config: " + where + " entries must be [from, value] pairs");
        s.knots.push_back({knot[0].get<int>(), knot[1].get<double>()});
    }
    for (std::size_t i = 1; i < s.knots.size(); ++i) {
        if (s.knots[i].from <= s.knots[i - 1].from)
            throw ConfigError("config: " + where + " knots must be strictly increasing");
    }
    if (s.knots.front().from != 0)
        throw ConfigError("config: " + where + " must start at t=0");
    return s;
}

json schedule_to_json(const StepSchedule& s) {
    json arr = json::array();
    for (const auto& k : s.knots) arr.push_back(json::array({k.from, k.value}));
    return arr;
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line number for the error message
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') ++line;
        }
        throw ConfigError("config: JSON parse error at line " + std::to_string(line) +
                          ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");

    reject_unknown_keys(root, {"scenario", "seed", "market", "firms", "agent", "srp"},
                        "top level");

    std::string scenario = "custom";
    take(root, "scenario", scenario);
    ExperimentConfig cfg = scenario_defaults(scenario);
    take(root, "seed", cfg.seed);

    if (root.contains("market")) {
        const json& m = root.at("market");
        reject_unknown_keys(m,
                            {"a_schedule", "b", "capacity", "max_production",
                             "horizon_steps", "signal_sigma", "price_on_sold",
                             "customers_schedule"},
                            "market");
        if (m.contains("a_schedule"))
            cfg.market.a_schedule = parse_schedule(m.at("a_schedule"), "market.a_schedule");
        take(m, "b", cfg.market.b);
        take(m, "capacity", cfg.market.capacity);
        take(m, "max_production", cfg.market.max_production);
        take(m, "horizon_steps", cfg.market.horizon_steps);
        take(m, "signal_sigma", cfg.market.signal_sigma);
        take(m, "price_on_sold", cfg.market.price_on_sold);
        if (m.contains("customers_schedule"))
            cfg.market.customers_schedule =
                parse_schedule(m.at("customers_schedule"), "market.customers_schedule");
    }

    if (root.contains("firms")) {
        const json& firms = root.at("firms");
        if (!firms.is_array() || firms.empty())
            throw ConfigError("config: firms must be a non-empty array");
        cfg.firms.clear();
        for (const auto& f : firms) {
            reject_unknown_keys(f, {"cost", "sales_sigma"}, "firms[]");
            FirmConfig firm;
            if (!f.contains("cost")) throw ConfigError("config: firm entry missing cost");
            firm.cost = f.at("cost").get<double>();
            if (f.contains("sales_sigma")) firm.sales_sigma = f.at("sales_sigma").get<double>();
            cfg.firms.push_back(firm);
        }
    }

    if (root.contains("agent")) {
        const json& a = root.at("agent");
        reject_unknown_keys(a,
                            {"kappa", "sales_sigma", "production_sigma", "signal_sigma",
                             "transition_sigma", "context_shift_sales",
                             "context_shift_production", "policy_horizon",
                             "policy_precision", "policy_cap", "max_iterations",
                             "convergence_tol", "selection_mode", "occupancy_cost",
                             "analysis_cost", "rebuild_sales_likelihood"},
                            "agent");
        take(a, "kappa", cfg.agent.kappa);
        take(a, "sales_sigma", cfg.agent.sales_sigma);
        take(a, "production_sigma", cfg.agent.production_sigma);
        take(a, "signal_sigma", cfg.agent.signal_sigma);
        take(a, "transition_sigma", cfg.agent.transition_sigma);
        take(a, "context_shift_sales", cfg.agent.context_shift_sales);
        take(a, "context_shift_production", cfg.agent.context_shift_production);
        take(a, "policy_horizon", cfg.agent.policy_horizon);
        take(a, "policy_precision", cfg.agent.policy_precision);
        take(a, "policy_cap", cfg.agent.policy_cap);
        take(a, "max_iterations", cfg.agent.max_iterations);
        take(a, "convergence_tol", cfg.agent.convergence_tol);
        take(a, "selection_mode", cfg.agent.selection_mode);
        take(a, "occupancy_cost", cfg.agent.occupancy_cost);
        take(a, "analysis_cost", cfg.agent.analysis_cost);
        take(a, "rebuild_sales_likelihood", cfg.agent.rebuild_sales_likelihood);
    }

    if (root.contains("srp")) {
        const json& s = root.at("srp");
        reject_unknown_keys(s,
                            {"learners", "max_features", "poisson_lambda", "adwin_delta",
                             "window_cap", "pretrain_count"},
                            "srp");
        take(s, "learners", cfg.srp.learners);
        take(s, "max_features", cfg.srp.max_features);
        take(s, "poisson_lambda", cfg.srp.poisson_lambda);
        take(s, "adwin_delta", cfg.srp.adwin_delta);
        take(s, "window_cap", cfg.srp.window_cap);
        take(s, "pretrain_count", cfg.srp.pretrain_count);
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
    json root;
    root["scenario"] = cfg.scenario;
    root["seed"] = cfg.seed;
    root["market"] = {
        {"a_schedule", schedule_to_json(cfg.market.a_schedule)},
        {"b", cfg.market.b},
        {"capacity", cfg.market.capacity},
        {"max_production", cfg.market.max_production},
        {"horizon_steps", cfg.market.horizon_steps},
        {"signal_sigma", cfg.market.signal_sigma},
        {"price_on_sold", cfg.market.price_on_sold},
        {"customers_schedule", schedule_to_json(cfg.market.customers_schedule)},
    };
    root["firms"] = json::array();
    for (const FirmConfig& f : cfg.firms) {
        json firm = {{"cost", f.cost}};
        if (f.sales_sigma) firm["sales_sigma"] = *f.sales_sigma;
        root["firms"].push_back(firm);
    }
    root["agent"] = {
        {"kappa", cfg.agent.kappa},
        {"sales_sigma", cfg.agent.sales_sigma},
        {"production_sigma", cfg.agent.production_sigma},
        {"signal_sigma", cfg.agent.signal_sigma},
        {"transition_sigma", cfg.agent.transition_sigma},
        {"context_shift_sales", cfg.agent.context_shift_sales},
        {"context_shift_production", cfg.agent.context_shift_production},
        {"policy_horizon", cfg.agent.policy_horizon},
        {"policy_precision", cfg.agent.policy_precision},
        {"policy_cap", cfg.agent.policy_cap},
        {"max_iterations", cfg.agent.max_iterations},
        {"convergence_tol", cfg.agent.convergence_tol},
        {"selection_mode", cfg.agent.selection_mode},
        {"occupancy_cost", cfg.agent.occupancy_cost},
        {"analysis_cost", cfg.agent.analysis_cost},
        {"rebuild_sales_likelihood", cfg.agent.rebuild_sales_likelihood},
    };
    root["srp"] = {
        {"learners", cfg.srp.learners},
        {"max_features", cfg.srp.max_features},
        {"poisson_lambda", cfg.srp.poisson_lambda},
        {"adwin_delta", cfg.srp.adwin_delta},
        {"window_cap", cfg.srp.window_cap},
        {"pretrain_count", cfg.srp.pretrain_count},
    };
    return root.dump(2) + "\n";
}

} // namespace aif
