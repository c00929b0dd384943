// Command-line front end: seeded scenario runs with CSV/JSON export, static
// SVG figures, and the seeded self-check suites.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "aif/config.hpp"
#include "aif/loop.hpp"
#include "aif/plot.hpp"
#include "aif/verify.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string default_out_dir() {
    const char* env = std::getenv("COURNOT_AIF_OUT");
    return env ? env : "out";
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
            const std::string& out_dir) {
    aif::ExperimentConfig cfg;
    try {
        cfg = aif::load_config_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (seed_flag) cfg.seed = *seed_flag;

    fs::create_directories(out_dir);
    const aif::RunResult result = aif::run_experiment(cfg, cfg.seed);

    write_file(fs::path(out_dir) / "trace.csv", aif::trace_to_csv(result.records));
    write_file(fs::path(out_dir) / "resolved-config.json", aif::resolved_config_json(cfg));
    if (!result.records.empty()) {
        std::vector<double> costs;
        for (const auto& f : cfg.firms) costs.push_back(f.cost);
        write_file(fs::path(out_dir) / "summary.json",
                   aif::summary_to_json(aif::summarize(result.records, costs,
                                                       cfg.market.max_production)));
    }
    if (!result.completed) {
        std::cerr << "error: run aborted: " << result.error
                  << " (partial trace written to " << out_dir << ")\n";
        return 3;
    }
    std::cout << "wrote " << result.records.size() << " steps to " << out_dir << "\n";
    return 0;
}

int cmd_plot(const std::string& input, const std::string& figure,
             const std::string& out_file, std::size_t firm, const std::string& matrix,
             const std::string& context) {
    try {
        std::string svg;
        if (figure == "behavior" || figure == "price") {
            std::ifstream in(input, std::ios::binary);
            if (!in) throw aif::ConfigError("cannot open trace " + input);
            std::ostringstream buf;
            buf << in.rdbuf();
            const std::vector<aif::StepRecord> records = aif::trace_from_csv(buf.str());
            if (records.empty()) throw aif::ConfigError("trace has no rows");
            svg = figure == "behavior" ? aif::render_behavior_svg(records)
                                       : aif::render_price_svg(records);
        } else if (figure == "likelihood") {
            // Input is a scenario or resolved config; the requested CPT is
            // rebuilt from it.
            const aif::ExperimentConfig cfg = aif::load_config_file(input);
            if (firm < 1 || firm > cfg.firms.size())
                throw aif::ConfigError("--firm out of range");
            aif::FirmModelParams params = cfg.firm_model_params(firm - 1);
            const int ctx = context == "reduce" ? aif::kContextReduce
                                                : aif::kContextAcceptable;
            aif::Cpt cpt;
            std::string title;
            if (matrix == "sales") {
                cpt = aif::build_sales_likelihood(ctx, params.sales_sigma,
                                                  params.br_target, params);
                title = "p(sales | warehouse), " + context;
            } else if (matrix == "production") {
                cpt = aif::build_production_likelihood(ctx, params.production_sigma,
                                                       params);
                title = "p(production | warehouse), " + context;
            } else if (matrix == "signal") {
                cpt = aif::build_signal_likelihood(aif::kEpistemicNotAnalyzed, ctx,
                                                   params.signal_sigma,
                                                   aif::default_context_map(), params);
                title = "p(signal | warehouse), " + context;
            } else if (matrix == "warehouse") {
                cpt = aif::build_warehouse_transition(params.br_target,
                                                      params.transition_sigma, params);
                title = "p(warehouse' | warehouse, production)";
            } else {
                throw aif::ConfigError("unknown --matrix " + matrix);
            }
            svg = aif::render_likelihood_svg(cpt, title);
        } else {
            throw aif::ConfigError("unknown figure " + figure);
        }
        write_file(out_file, svg);
        std::cout << "wrote " << out_file << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    bool ok = false;
    if (suite == "oracle") {
        ok = aif::verify_oracle_suite(seed, std::cout);
    } else if (suite == "efe") {
        ok = aif::verify_efe_suite(seed, std::cout);
    } else if (suite == "srp") {
        ok = aif::verify_srp_suite(seed, std::cout);
    } else {
        std::cerr << "error: unknown suite " << suite << "\n";
        return 2;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent active-inference Cournot market simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    std::string out_dir = default_out_dir();
    CLI::App* run = app.add_subcommand("run", "Run a scenario and export the trace");
    run->add_option("config", config_path, "Scenario config file")->required();
    run->add_option("--seed", seed_flag, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory");

    std::string plot_input, figure, plot_out = "figure.svg";
    std::string matrix = "sales", context = "acceptable";
    std::size_t firm = 1;
    CLI::App* plot = app.add_subcommand("plot", "Render a figure from a trace or config");
    plot->add_option("input", plot_input, "trace.csv (behavior/price) or config (likelihood)")
        ->required();
    plot->add_option("--figure", figure, "behavior | price | likelihood")->required();
    plot->add_option("--out", plot_out, "Output SVG file");
    plot->add_option("--firm", firm, "Firm for likelihood figures (1-based)");
    plot->add_option("--matrix", matrix, "sales | production | signal | warehouse");
    plot->add_option("--context", context, "acceptable | reduce");

    std::string suite;
    std::uint64_t verify_seed = 0;
    CLI::App* verify = app.add_subcommand("verify", "Run the seeded self-check suites");
    verify->add_option("--suite", suite, "oracle | efe | srp")->required();
    verify->add_option("--seed", verify_seed, "Suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run->parsed()) return cmd_run(config_path, seed_flag, out_dir);
    if (plot->parsed()) return cmd_plot(plot_input, figure, plot_out, firm, matrix, context);
    if (verify->parsed()) return cmd_verify(suite, verify_seed);
    return 2;
}
