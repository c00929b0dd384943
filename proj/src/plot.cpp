#include "aif/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace aif {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const char* kFirmColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                             "#8c564b", "#e377c2"};

const char* firm_color(std::size_t i) { return kFirmColors[i % 6]; }

void open_svg(std::ostringstream& svg, double width, double height) {
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
        << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
        << num(height) << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" fill=\"white\"/>\n";
}

void text(std::ostringstream& svg, double x, double y, const std::string& s,
          const std::string& extra = "") {
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(y)
        << "\" font-family=\"sans-serif\" font-size=\"10\" " << extra << ">" << s
        << "</text>\n";
}

void polyline(std::ostringstream& svg, const std::vector<std::pair<double, double>>& pts,
              const std::string& stroke, const std::string& cls,
              const std::string& dash = "") {
    svg << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"1.5\"";
    if (!dash.empty()) svg << " stroke-dasharray=\"" << dash << "\"";
    svg << " points=\"";
    for (const auto& [x, y] : pts) svg << num(x) << "," << num(y) << " ";
    svg << "\"/>\n";
}

} // namespace

std::string render_behavior_svg(const std::vector<StepRecord>& records) {
    if (records.empty()) throw ConfigError("behavior plot: empty trace");
    const std::size_t n_firms = records.front().firms.size();
    const std::size_t steps = records.size();

    const double margin_left = 40, margin_right = 15, margin_top = 25;
    const double panel_h = 150, strip_h = 14, panel_gap = 40;
    const double bar_w = 18, bar_gap = 6;
    const double plot_w = static_cast<double>(steps) * (bar_w + bar_gap);
    const double width = margin_left + plot_w + margin_right;
    const double panel_total = panel_h + 2 * strip_h + panel_gap;
    const double height = margin_top + static_cast<double>(n_firms) * panel_total;

    int max_level = 1;
    for (const auto& r : records) {
        for (const auto& f : r.firms)
            max_level = std::max({max_level, f.produced + f.warehouse, f.sold});
    }
    const double y_scale = panel_h / static_cast<double>(max_level);

    std::ostringstream svg;
    open_svg(svg, width, height);

    for (std::size_t i = 0; i < n_firms; ++i) {
        const double top = margin_top + static_cast<double>(i) * panel_total;
        const double base = top + panel_h;
        text(svg, margin_left, top - 8, "firm " + std::to_string(i + 1),
             "font-weight=\"bold\"");
        svg << "<line x1=\"" << num(margin_left) << "\" y1=\"" << num(base) << "\" x2=\""
            << num(margin_left + plot_w) << "\" y2=\"" << num(base)
            << "\" stroke=\"#999\"/>\n";

        std::vector<std::pair<double, double>> sales_pts, inferred_pts;
        for (std::size_t t = 0; t < steps; ++t) {
            const FirmStepRecord& f = records[t].firms[i];
            const double x = margin_left + static_cast<double>(t) * (bar_w + bar_gap);
            const double xc = x + bar_w / 2;

            const double prod_h = f.produced * y_scale;
            svg << "<rect class=\"prod-bar\" x=\"" << num(x) << "\" y=\""
                << num(base - prod_h) << "\" width=\"" << num(bar_w) << "\" height=\""
                << num(prod_h) << "\" fill=\"" << firm_color(i) << "\"/>\n";
            const double stock_h = f.warehouse * y_scale;
            svg << "<rect class=\"stock-bar\" x=\"" << num(x) << "\" y=\""
                << num(base - prod_h - stock_h) << "\" width=\"" << num(bar_w)
                << "\" height=\"" << num(stock_h) << "\" fill=\"" << firm_color(i)
                << "\" fill-opacity=\"0.35\"/>\n";

            sales_pts.push_back({xc, base - f.sold * y_scale});
            inferred_pts.push_back({xc, base - f.inferred_warehouse * y_scale});

            // Annotation strips: epistemic state and inferred context.
            const double strip1 = base + 4;
            const double strip2 = strip1 + strip_h;
            svg << "<rect class=\"epi-cell\" x=\"" << num(x) << "\" y=\"" << num(strip1)
                << "\" width=\"" << num(bar_w) << "\" height=\"" << num(strip_h - 2)
                << "\" fill=\"" << (f.epistemic_state ? "#444" : "#ddd") << "\"/>\n";
            svg << "<rect class=\"ctx-cell\" x=\"" << num(x) << "\" y=\"" << num(strip2)
                << "\" width=\"" << num(bar_w) << "\" height=\"" << num(strip_h - 2)
                << "\" fill=\"" << (f.inferred_context ? "#c94" : "#9c4") << "\"/>\n";
        }
        polyline(svg, sales_pts, "#111", "sales-line");
        polyline(svg, inferred_pts, firm_color(i), "inferred-line", "4,3");
        text(svg, margin_left + plot_w + 2, base + 4 + strip_h - 4, "A/DN");
        text(svg, margin_left + plot_w + 2, base + 4 + 2 * strip_h - 4, "ctx");
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string render_price_svg(const std::vector<StepRecord>& records) {
    if (records.empty()) throw ConfigError("price plot: empty trace");
    const std::size_t n_firms = records.front().firms.size();
    const std::size_t steps = records.size();

    const double margin = 40, width = 560, height = 300;
    const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;

    double pmax = 1.0;
    for (const auto& r : records) {
        pmax = std::max(pmax, r.price);
        for (const auto& f : r.firms) pmax = std::max(pmax, f.predicted_price);
    }
    pmax *= 1.05;

    auto xpos = [&](std::size_t t) {
        return margin + plot_w * static_cast<double>(t) /
                            static_cast<double>(std::max<std::size_t>(steps - 1, 1));
    };
    auto ypos = [&](double p) { return height - margin - plot_h * p / pmax; };

    std::ostringstream svg;
    open_svg(svg, width, height);
    svg << "<line x1=\"" << num(margin) << "\" y1=\"" << num(height - margin)
        << "\" x2=\"" << num(width - margin) << "\" y2=\"" << num(height - margin)
        << "\" stroke=\"#999\"/>\n";
    svg << "<line x1=\"" << num(margin) << "\" y1=\"" << num(margin) << "\" x2=\""
        << num(margin) << "\" y2=\"" << num(height - margin) << "\" stroke=\"#999\"/>\n";

    std::vector<std::pair<double, double>> actual;
    for (std::size_t t = 0; t < steps; ++t) actual.push_back({xpos(t), ypos(records[t].price)});
    polyline(svg, actual, "#000", "price-actual");

    for (std::size_t i = 0; i < n_firms; ++i) {
        std::vector<std::pair<double, double>> pred;
        for (std::size_t t = 0; t < steps; ++t)
            pred.push_back({xpos(t), ypos(records[t].firms[i].predicted_price)});
        polyline(svg, pred, firm_color(i), "price-pred-f" + std::to_string(i + 1), "5,3");
        text(svg, width - margin - 90, margin + 12 * static_cast<double>(i + 1),
             "firm " + std::to_string(i + 1) + " predicted",
             std::string("fill=\"") + firm_color(i) + "\"");
    }
    text(svg, width - margin - 90, margin, "actual price");
    text(svg, margin - 30, margin - 8, num(pmax));
    text(svg, margin - 30, height - margin, "0");
    svg << "</svg>\n";
    return svg.str();
}

std::string render_likelihood_svg(const Cpt& cpt, const std::string& title) {
    const std::size_t rows = static_cast<std::size_t>(cpt.outcome_card);
    const std::size_t cols = cpt.n_conditions();
    const double cell = 22, margin = 45, title_h = 20;
    const double width = margin + static_cast<double>(cols) * cell + 15;
    const double height = title_h + margin / 2 + static_cast<double>(rows) * cell + 30;

    std::ostringstream svg;
    open_svg(svg, width, height);
    text(svg, margin, 14, title, "font-weight=\"bold\"");

    for (std::size_t c = 0; c < cols; ++c) {
        auto col = cpt.column(c);
        for (std::size_t o = 0; o < rows; ++o) {
            const double v = std::clamp(col[o], 0.0, 1.0);
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", shade, shade, 255);
            const double x = margin + static_cast<double>(c) * cell;
            // Outcome 0 at the bottom row.
            const double y =
                title_h + margin / 2 + static_cast<double>(rows - 1 - o) * cell;
            svg << "<rect class=\"cell\" x=\"" << num(x) << "\" y=\"" << num(y)
                << "\" width=\"" << num(cell) << "\" height=\"" << num(cell)
                << "\" fill=\"" << color << "\" stroke=\"#fff\"/>\n";
        }
        if (cols <= 24 || c % 2 == 0)
            text(svg, margin + static_cast<double>(c) * cell + 6,
                 title_h + margin / 2 + static_cast<double>(rows) * cell + 12,
                 std::to_string(c));
    }
    for (std::size_t o = 0; o < rows; ++o) {
        text(svg, margin - 18,
             title_h + margin / 2 + static_cast<double>(rows - 1 - o) * cell + 14,
             std::to_string(o));
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace aif
