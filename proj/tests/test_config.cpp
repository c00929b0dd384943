#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aif/config.hpp"
#include "aif/trace.hpp"

using namespace aif;

TEST_CASE("scenario defaults materialize the paper setups") {
    const ExperimentConfig duo = scenario_defaults("duopoly-reference");
    CHECK(duo.firms.size() == 2);
    CHECK(duo.firms[0].cost == 16.0);
    CHECK(duo.firms[1].cost == 17.0);
    CHECK(duo.market.a_schedule.at(14) == 30.0);
    CHECK(duo.market.a_schedule.at(15) == 45.0);
    CHECK(duo.market.customers_schedule.at(3) == 10);
    CHECK(duo.market.customers_schedule.at(12) == 4);
    CHECK(duo.market.customers_schedule.at(20) == 15);
    CHECK_NOTHROW(duo.validate());

    const ExperimentConfig prec = scenario_defaults("duopoly-precision-1.5");
    CHECK(prec.firms[1].sales_sigma == 1.5);
    CHECK_FALSE(prec.firms[0].sales_sigma.has_value());

    const ExperimentConfig simp = scenario_defaults("duopoly-simplified-precision-0.6");
    CHECK(simp.market.customers_schedule.at(5) == 10);
    CHECK(simp.market.customers_schedule.at(12) == 6);
    CHECK(simp.firms[1].sales_sigma == 0.6);

    const ExperimentConfig three = scenario_defaults("three-firm-reference");
    CHECK(three.firms.size() == 3);
    CHECK(three.firms[0].cost == 13.0);
    CHECK(three.market.customers_schedule.at(0) == 15);
    CHECK(three.market.customers_schedule.at(20) == 20);

    CHECK_THROWS_AS(scenario_defaults("not-a-scenario"), ConfigError);
}

TEST_CASE("config parsing applies overrides on scenario defaults") {
    const ExperimentConfig cfg = parse_config_text(R"({
        "scenario": "duopoly-reference",
        "seed": 7,
        "agent": {"kappa": 0.2},
        "firms": [{"cost": 12.0}, {"cost": 13.0, "sales_sigma": 1.5}]
    })");
    CHECK(cfg.seed == 7);
    CHECK(cfg.agent.kappa == 0.2);
    CHECK(cfg.agent.sales_sigma == 2.0); // untouched default
    CHECK(cfg.firms[0].cost == 12.0);
    CHECK(cfg.firms[1].sales_sigma == 1.5);
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(parse_config_text(R"({"scenario": "duopoly-reference", "sed": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"scenario": "duopoly-reference", "agent": {"kapa": 1}})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"scenario": "duopoly-reference", "firms": [{"cost": 1, "x": 2}]})"),
        ConfigError);
}

TEST_CASE("invalid values are rejected") {
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"scenario": "duopoly-reference", "agent": {"sales_sigma": -1.0}})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"scenario": "duopoly-reference", "agent": {"selection_mode": "x"}})"),
        ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"scenario": "custom"})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
}

TEST_CASE("parse errors carry a line number") {
    try {
        parse_config_text("{\n  \"scenario\": \"duopoly-reference\",\n  oops\n}");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("resolved config round-trips") {
    const ExperimentConfig cfg = scenario_defaults("three-firm-precision-0.6");
    const std::string dumped = resolved_config_json(cfg);
    const ExperimentConfig again = parse_config_text(dumped);
    CHECK(resolved_config_json(again) == dumped);
    CHECK(again.firms.size() == 3);
    CHECK(again.firms[1].sales_sigma == 0.6);
}

TEST_CASE("firm model params pick up per-firm overrides") {
    ExperimentConfig cfg = scenario_defaults("duopoly-precision-1.5");
    const FirmModelParams f0 = cfg.firm_model_params(0);
    const FirmModelParams f1 = cfg.firm_model_params(1);
    CHECK(f0.sales_sigma == 2.0);
    CHECK(f1.sales_sigma == 1.5);
    CHECK(f0.unit_cost == 16.0);
    CHECK(f1.unit_cost == 17.0);
    CHECK(f0.capacity == 10);
}

TEST_CASE("trace csv round-trips byte for byte") {
    std::vector<StepRecord> records;
    for (int t = 0; t < 3; ++t) {
        StepRecord r;
        r.t = t;
        r.price = 21.123456789 + t;
        r.customers = 10 - t;
        r.firms.resize(2);
        for (std::size_t i = 0; i < 2; ++i) {
            r.firms[i].produced = t + static_cast<int>(i);
            r.firms[i].analysis = (t + static_cast<int>(i)) % 2 == 0;
            r.firms[i].sold = t;
            r.firms[i].warehouse = 2 * t;
            r.firms[i].inferred_warehouse = 0.333333333333 * t;
            r.firms[i].inferred_context = t % 2;
            r.firms[i].epistemic_state = (t + 1) % 2;
            r.firms[i].predicted_price = 29.87654321 - t;
            r.firms[i].br_current = 5;
            r.firms[i].br_recomputed = t == 2;
        }
        records.push_back(r);
    }
    const std::string csv = trace_to_csv(records);
    const std::vector<StepRecord> parsed = trace_from_csv(csv);
    CHECK(trace_to_csv(parsed) == csv);
    CHECK(parsed.size() == 3);
    CHECK(parsed[2].firms[1].br_recomputed);
}

TEST_CASE("summary recomputes exactly from the trace") {
    std::vector<StepRecord> records(2);
    records[0].t = 0;
    records[0].price = 20.0;
    records[0].firms.resize(2);
    records[0].firms[0] = {5, false, 5, 0, 0.1, 0, 0, 21.0, 5, false};
    records[0].firms[1] = {4, true, 4, 1, 0.9, 0, 1, 20.0, 4, false};
    records[1].t = 1;
    records[1].price = 22.0;
    records[1].firms.resize(2);
    records[1].firms[0] = {6, false, 5, 1, 0.7, 1, 0, 21.5, 5, false};
    records[1].firms[1] = {4, false, 4, 1, 1.1, 0, 0, 20.5, 4, true};

    const RunSummary s = summarize(records, {16.0, 17.0}, 6);
    CHECK(s.firms[0].total_profit ==
          doctest::Approx(20.0 * 5 - 16.0 * 5 + 22.0 * 5 - 16.0 * 6));
    CHECK(s.firms[1].total_profit ==
          doctest::Approx(20.0 * 4 - 17.0 * 4 + 22.0 * 4 - 17.0 * 4));
    CHECK(s.firms[0].steps_at_br == 1); // 5==5 at t0, 6!=5 at t1
    CHECK(s.firms[1].steps_at_br == 2);
    CHECK(s.firms[1].analysis_count == 1);
    CHECK(s.firms[0].context_switches == 1);
    CHECK(s.mean_price == doctest::Approx(21.0));
    CHECK(s.mean_unsold_inventory == doctest::Approx((0 + 1 + 1 + 1) / 2.0));
}
