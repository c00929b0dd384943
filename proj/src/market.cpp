#include "aif/market.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

#include "aif/categorical.hpp"
#include "aif/genmodel.hpp"

namespace aif {

double StepSchedule::at(int t) const {
    if (knots.empty()) throw ConfigError("StepSchedule: empty schedule");
    double value = knots.front().value;
    for (const Knot& k : knots) {
        if (t >= k.from) value = k.value;
    }
    return value;
}

double market_price(double a, double b, const std::vector<double>& offered) {
    double total = 0.0;
    for (double q : offered) {
        if (q < 0.0) throw ParameterError("market_price: negative quantity");
        total += q;
    }
    return std::max(0.0, a - b * total);
}

std::vector<double> nash_quantities(double a, double b, const std::vector<double>& costs) {
    if (costs.empty()) throw ParameterError("nash_quantities: need at least one firm");
    if (b <= 0.0) throw ParameterError("nash_quantities: b must be > 0");
    const double n = static_cast<double>(costs.size());
    const double cost_sum = std::accumulate(costs.begin(), costs.end(), 0.0);
    std::vector<double> q(costs.size());
    for (std::size_t i = 0; i < costs.size(); ++i) {
        q[i] = (a - (n + 1.0) * costs[i] + cost_sum) / ((n + 1.0) * b);
        if (q[i] < 0.0)
            throw CornerSolutionError("nash_quantities: interior equilibrium does not exist");
    }
    return q;
}

double best_response(double a, double b, double cost_i, double opponents_quantity) {
    return (a - b * opponents_quantity - cost_i) / (2.0 * b);
}

Scenario parse_scenario(const std::string& name) {
    if (name == "duopoly-reference") return Scenario::duopoly_reference;
    if (name == "duopoly-simplified") return Scenario::duopoly_simplified;
    if (name == "three-firm") return Scenario::three_firm;
    throw ConfigError("unknown scenario: " + name);
}

int customers(int t, Scenario scenario) {
    switch (scenario) {
        case Scenario::duopoly_reference:
            if (t < 6) return 10;
            if (t < 11) return 6;
            if (t < 15) return 4;
            return 15;
        case Scenario::duopoly_simplified:
            if (t < 11) return 10;
            if (t < 15) return 6;
            return 15;
        case Scenario::three_firm:
            if (t < 6) return 15;
            if (t < 11) return 12;
            if (t < 15) return 9;
            return 20;
    }
    throw ConfigError("unknown scenario");
}

double a_of_t(int t) {
    return t < 15 ? 30.0 : 45.0;
}

namespace {

int sample_level(const Categorical& dist, std::mt19937_64& eng) {
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(dist.size()) - 1;
}

} // namespace

StepOutcome step_market(std::vector<FirmGroundTruth>& state,
                        const std::vector<int>& productions,
                        const std::vector<bool>& analyses, int t,
                        const MarketParams& params, std::uint64_t noise_seed) {
    const std::size_t n = state.size();
    if (productions.size() != n || analyses.size() != n)
        throw DimensionError("step_market: per-firm list length mismatch");
    for (int p : productions) {
        if (p < 0 || p > params.max_production)
            throw ParameterError("step_market: production out of range");
    }

    StepOutcome out;
    out.firms.resize(n);
    out.customers = static_cast<int>(params.customers_schedule.at(t));
    const double a = params.a_schedule.at(t);

    std::vector<int> available(n), remaining(n), assigned(n, 0), sold(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        available[i] = state[i].warehouse + productions[i];
        remaining[i] = available[i];
    }

    // Equal split; leftover customers rotate across firms with the step index.
    const int base = out.customers / static_cast<int>(n);
    const int extra = out.customers % static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) assigned[i] = base;
    for (int j = 0; j < extra; ++j)
        assigned[(static_cast<std::size_t>(t) + static_cast<std::size_t>(j)) % n] += 1;

    // Each customer takes one unit from its firm when possible; unserved
    // customers fall back to whichever firm has the most stock left.
    int unserved = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int direct = std::min(assigned[i], remaining[i]);
        sold[i] += direct;
        remaining[i] -= direct;
        unserved += assigned[i] - direct;
    }
    for (int c = 0; c < unserved; ++c) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (remaining[i] > remaining[pick]) pick = i;
        }
        if (remaining[pick] <= 0) break;
        sold[pick] += 1;
        remaining[pick] -= 1;
    }

    std::vector<double> supply(n);
    for (std::size_t i = 0; i < n; ++i)
        supply[i] = static_cast<double>(params.price_on_sold ? sold[i] : available[i]);
    out.price = market_price(a, params.b, supply);

    std::mt19937_64 eng(noise_seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int carried = available[i] - sold[i];
        const int stored = std::min(carried, params.capacity);
        if (carried > stored) {
            out.overflow_discarded += carried - stored;
            std::cerr << "warning: firm " << i + 1 << " discarded " << carried - stored
                      << " overflow unit(s) at t=" << t << "\n";
        }
        state[i].warehouse = stored;

        FirmStepOutcome& f = out.firms[i];
        f.produced = productions[i];
        f.sold = sold[i];
        f.warehouse_after = stored;
        f.analysis_performed = analyses[i];
        const int band = signal_band(stored, params.capacity);
        if (analyses[i]) {
            f.signal_level = band;
        } else {
            const Categorical noisy =
                discretized_gaussian(static_cast<double>(band), params.signal_sigma, 4);
            f.signal_level = sample_level(noisy, eng);
        }
    }
    return out;
}

} // namespace aif
