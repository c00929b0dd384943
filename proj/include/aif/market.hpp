#ifndef AIF_MARKET_HPP
#define AIF_MARKET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "aif/errors.hpp"

namespace aif {

/// Step function t -> value, as (from, value) knots sorted by `from`.
struct StepSchedule {
    struct Knot {
        int from = 0;
        double value = 0.0;
    };
    std::vector<Knot> knots;

    double at(int t) const;
};

struct MarketParams {
    StepSchedule a_schedule;         // max price over time
    double b = 1.0;                  // price sensitivity
    int capacity = 10;               // warehouse units per firm
    int max_production = 6;          // units per step per firm
    int horizon_steps = 25;
    double signal_sigma = 1.0;       // GP-side noise on the warehouse signal band
    bool price_on_sold = false;      // alternative: price from sold units
    StepSchedule customers_schedule;
};

struct FirmGroundTruth {
    int warehouse = 0;
    double unit_cost = 0.0;
};

struct FirmStepOutcome {
    int produced = 0;
    int sold = 0;
    int warehouse_after = 0;
    int signal_level = 0;
    bool analysis_performed = false;
};

struct StepOutcome {
    double price = 0.0;
    int customers = 0;
    std::vector<FirmStepOutcome> firms;
    int overflow_discarded = 0; // total units lost to the capacity clamp
};

double market_price(double a, double b, const std::vector<double>& offered);

/// Simultaneous fixed point of the one-shot best-response map; closed form
/// q_i = (a - (n+1) c_i + sum_j c_j) / ((n+1) b).
std::vector<double> nash_quantities(double a, double b, const std::vector<double>& costs);

/// One-step best response of firm i against fixed opponent quantities.
double best_response(double a, double b, double cost_i, double opponents_quantity);

enum class Scenario {
    duopoly_reference,
    duopoly_simplified,
    three_firm,
};

Scenario parse_scenario(const std::string& name);
int customers(int t, Scenario scenario);
double a_of_t(int t);

/// Advances the ground-truth market by one step: allocates customers, clears
/// sales, prices the supply, updates warehouses, and emits per-firm signals.
StepOutcome step_market(std::vector<FirmGroundTruth>& state,
                        const std::vector<int>& productions,
                        const std::vector<bool>& analyses, int t,
                        const MarketParams& params, std::uint64_t noise_seed);

} // namespace aif

#endif
