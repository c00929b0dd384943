#ifndef AIF_PLOT_HPP
#define AIF_PLOT_HPP

#include <string>
#include <vector>

#include "aif/categorical.hpp"
#include "aif/trace.hpp"

namespace aif {

/// Per-firm panels: stacked production/stock bars, sales line, inferred
/// warehouse dashed line, epistemic and context annotation strips.
std::string render_behavior_svg(const std::vector<StepRecord>& records);

/// Actual market price (black) plus one predicted-price series per firm.
std::string render_price_svg(const std::vector<StepRecord>& records);

/// Heatmap of a conditional probability table; one cell per (outcome,
/// condition) entry.
std::string render_likelihood_svg(const Cpt& cpt, const std::string& title);

} // namespace aif

#endif
