#ifndef AIF_TRACE_HPP
#define AIF_TRACE_HPP

#include <string>
#include <vector>

#include "aif/errors.hpp"

namespace aif {

struct FirmStepRecord {
    int produced = 0;
    bool analysis = false;
    int sold = 0;
    int warehouse = 0;             // ground truth after the step
    double inferred_warehouse = 0; // posterior mean at decision time
    int inferred_context = 0;      // argmax: 0 acceptable, 1 reduce
    int epistemic_state = 0;       // 0 DN, 1 Analysis (refers to t-1's action)
    double predicted_price = 0;
    int br_current = 0;
    bool br_recomputed = false;
};

struct StepRecord {
    int t = 0;
    double price = 0.0;
    int customers = 0;
    std::vector<FirmStepRecord> firms;
};

/// Fixed column order, LF line endings, floats at 9 significant digits;
/// parse + re-serialize is byte-identical.
std::string trace_to_csv(const std::vector<StepRecord>& records);
std::vector<StepRecord> trace_from_csv(const std::string& csv);

std::string format_double(double v); // the trace float format ("%.9g")

struct FirmSummary {
    double total_profit = 0.0;
    int steps_at_br = 0;
    int analysis_count = 0;
    int context_switches = 0;
};

struct RunSummary {
    std::vector<FirmSummary> firms;
    double mean_price = 0.0;
    double mean_unsold_inventory = 0.0; // mean over steps of total stock
};

RunSummary summarize(const std::vector<StepRecord>& records,
                     const std::vector<double>& unit_costs, int max_production);
std::string summary_to_json(const RunSummary& summary);

} // namespace aif

#endif
