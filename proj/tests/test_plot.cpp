#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aif/genmodel.hpp"
#include "aif/loop.hpp"
#include "aif/plot.hpp"

using namespace aif;

namespace {

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

} // namespace

TEST_CASE("behavior figure has one bar group per step per firm") {
    const ExperimentConfig cfg = scenario_defaults("duopoly-reference");
    const RunResult r = run_experiment(cfg, 0);
    REQUIRE(r.completed);
    const std::string svg = render_behavior_svg(r.records);
    CHECK(count_occurrences(svg, "class=\"prod-bar\"") == 25 * 2);
    CHECK(count_occurrences(svg, "class=\"stock-bar\"") == 25 * 2);
    CHECK(count_occurrences(svg, "class=\"sales-line\"") == 2);
    CHECK(count_occurrences(svg, "class=\"ctx-cell\"") == 25 * 2);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("price figure has a black actual series plus one per firm") {
    const ExperimentConfig cfg = scenario_defaults("three-firm-reference");
    const RunResult r = run_experiment(cfg, 0);
    REQUIRE(r.completed);
    const std::string svg = render_price_svg(r.records);
    CHECK(count_occurrences(svg, "class=\"price-actual\"") == 1);
    CHECK(count_occurrences(svg, "class=\"price-pred-f1\"") == 1);
    CHECK(count_occurrences(svg, "class=\"price-pred-f2\"") == 1);
    CHECK(count_occurrences(svg, "class=\"price-pred-f3\"") == 1);
}

TEST_CASE("likelihood heatmap matches the table dimensions") {
    FirmModelParams params;
    const Cpt sales = build_sales_likelihood(kContextAcceptable, 2.0, 5, params);
    const std::string svg = render_likelihood_svg(sales, "sales");
    CHECK(count_occurrences(svg, "class=\"cell\"") ==
          static_cast<std::size_t>(sales.outcome_card) * sales.n_conditions());

    const Cpt trans = build_warehouse_transition(5, 0.5, params);
    const std::string svg2 = render_likelihood_svg(trans, "transition");
    CHECK(count_occurrences(svg2, "class=\"cell\"") == 11u * 77u);
}

TEST_CASE("svg output is deterministic") {
    const ExperimentConfig cfg = scenario_defaults("duopoly-reference");
    const RunResult r = run_experiment(cfg, 2);
    REQUIRE(r.completed);
    CHECK(render_behavior_svg(r.records) == render_behavior_svg(r.records));
    CHECK(render_price_svg(r.records) == render_price_svg(r.records));
}
