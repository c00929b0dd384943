#include "aif/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

namespace aif {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

namespace {

std::vector<std::string> firm_columns(std::size_t i) {
    const std::string s = "_f" + std::to_string(i + 1);
    return {"produced" + s,  "analysis" + s,        "sold" + s,
            "warehouse" + s, "inferred_warehouse" + s, "inferred_context" + s,
            "epistemic" + s, "predicted_price" + s, "br" + s, "br_recomputed" + s};
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace

std::string trace_to_csv(const std::vector<StepRecord>& records) {
    const std::size_t n_firms = records.empty() ? 0 : records.front().firms.size();
    std::string out = "t,price,customers";
    for (std::size_t i = 0; i < n_firms; ++i) {
        for (const std::string& col : firm_columns(i)) {
            out += ',';
            out += col;
        }
    }
    out += '\n';
    for (const StepRecord& r : records) {
        out += std::to_string(r.t);
        out += ',';
        out += format_double(r.price);
        out += ',';
        out += std::to_string(r.customers);
        for (const FirmStepRecord& f : r.firms) {
            out += ',' + std::to_string(f.produced);
            out += ',' + std::to_string(f.analysis ? 1 : 0);
            out += ',' + std::to_string(f.sold);
            out += ',' + std::to_string(f.warehouse);
            out += ',' + format_double(f.inferred_warehouse);
            out += ',' + std::to_string(f.inferred_context);
            out += ',' + std::to_string(f.epistemic_state);
            out += ',' + format_double(f.predicted_price);
            out += ',' + std::to_string(f.br_current);
            out += ',' + std::to_string(f.br_recomputed ? 1 : 0);
        }
        out += '\n';
    }
    return out;
}

std::vector<StepRecord> trace_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trace: empty file");
    const std::vector<std::string> header = split(line, ',');
    if (header.size() < 3 || header[0] != "t" || header[1] != "price" ||
        header[2] != "customers")
        throw ConfigError("trace: unexpected header");
    if ((header.size() - 3) % 10 != 0)
        throw ConfigError("trace: malformed firm columns");
    const std::size_t n_firms = (header.size() - 3) / 10;

    std::vector<StepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != header.size())
            throw ConfigError("trace: row width mismatch at row " +
                              std::to_string(records.size() + 1));
        StepRecord r;
        r.t = std::atoi(cells[0].c_str());
        r.price = std::strtod(cells[1].c_str(), nullptr);
        r.customers = std::atoi(cells[2].c_str());
        r.firms.resize(n_firms);
        for (std::size_t i = 0; i < n_firms; ++i) {
            const std::size_t base = 3 + i * 10;
            FirmStepRecord& f = r.firms[i];
            f.produced = std::atoi(cells[base + 0].c_str());
            f.analysis = cells[base + 1] == "1";
            f.sold = std::atoi(cells[base + 2].c_str());
            f.warehouse = std::atoi(cells[base + 3].c_str());
            f.inferred_warehouse = std::strtod(cells[base + 4].c_str(), nullptr);
            f.inferred_context = std::atoi(cells[base + 5].c_str());
            f.epistemic_state = std::atoi(cells[base + 6].c_str());
            f.predicted_price = std::strtod(cells[base + 7].c_str(), nullptr);
            f.br_current = std::atoi(cells[base + 8].c_str());
            f.br_recomputed = cells[base + 9] == "1";
        }
        records.push_back(std::move(r));
    }
    return records;
}

RunSummary summarize(const std::vector<StepRecord>& records,
                     const std::vector<double>& unit_costs, int max_production) {
    RunSummary s;
    if (records.empty()) return s;
    const std::size_t n_firms = records.front().firms.size();
    if (unit_costs.size() != n_firms)
        throw DimensionError("summarize: cost list length mismatch");
    s.firms.resize(n_firms);

    double price_sum = 0.0, stock_sum = 0.0;
    for (std::size_t t = 0; t < records.size(); ++t) {
        const StepRecord& r = records[t];
        price_sum += r.price;
        for (std::size_t i = 0; i < n_firms; ++i) {
            const FirmStepRecord& f = r.firms[i];
            FirmSummary& fs = s.firms[i];
            fs.total_profit += r.price * f.sold - unit_costs[i] * f.produced;
            // Feasible BR: targets beyond the production cap count as the cap.
            if (f.produced == std::min(f.br_current, max_production)) ++fs.steps_at_br;
            if (f.analysis) ++fs.analysis_count;
            if (t > 0 && f.inferred_context != records[t - 1].firms[i].inferred_context)
                ++fs.context_switches;
            stock_sum += f.warehouse;
        }
    }
    s.mean_price = price_sum / static_cast<double>(records.size());
    s.mean_unsold_inventory = stock_sum / static_cast<double>(records.size());
    return s;
}

std::string summary_to_json(const RunSummary& summary) {
    nlohmann::json j;
    j["firms"] = nlohmann::json::array();
    for (const FirmSummary& f : summary.firms) {
        j["firms"].push_back({{"total_profit", f.total_profit},
                              {"steps_at_br", f.steps_at_br},
                              {"analysis_count", f.analysis_count},
                              {"context_switches", f.context_switches}});
    }
    j["market"] = {{"mean_price", summary.mean_price},
                   {"mean_unsold_inventory", summary.mean_unsold_inventory}};
    return j.dump(2) + "\n";
}

} // namespace aif
