#include "aif/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aif {

double safe_log(double p) {
    return std::log(p + kLogFloor);
}

bool Categorical::is_valid(double tol) const {
    if (probs.empty()) return false;
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
}

std::size_t Categorical::argmax() const {
    return static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double Categorical::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) m += static_cast<double>(i) * probs[i];
    return m;
}

Categorical Categorical::delta(std::size_t n, std::size_t at) {
    std::vector<double> p(n, 0.0);
    p.at(at) = 1.0;
    return Categorical(std::move(p));
}

Categorical Categorical::uniform(std::size_t n) {
    return Categorical(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Cpt::Cpt(int outcomes, std::vector<int> conditions)
    : outcome_card(outcomes), condition_cards(std::move(conditions)) {
    if (outcome_card < 1) throw ParameterError("Cpt: outcome cardinality must be >= 1");
    for (int c : condition_cards) {
        if (c < 1) throw ParameterError("Cpt: condition cardinality must be >= 1");
    }
    table.assign(n_conditions() * static_cast<std::size_t>(outcome_card), 0.0);
}

std::size_t Cpt::n_conditions() const {
    std::size_t n = 1;
    for (int c : condition_cards) n *= static_cast<std::size_t>(c);
    return n;
}

std::size_t Cpt::condition_index(std::span<const int> conds) const {
    if (conds.size() != condition_cards.size())
        throw DimensionError("Cpt: condition rank mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < conds.size(); ++i) {
        if (conds[i] < 0 || conds[i] >= condition_cards[i])
            throw DimensionError("Cpt: condition level out of range");
        idx = idx * static_cast<std::size_t>(condition_cards[i]) +
              static_cast<std::size_t>(conds[i]);
    }
    return idx;
}

std::span<double> Cpt::column(std::size_t cond_index) {
    return {table.data() + cond_index * static_cast<std::size_t>(outcome_card),
            static_cast<std::size_t>(outcome_card)};
}

std::span<const double> Cpt::column(std::size_t cond_index) const {
    return {table.data() + cond_index * static_cast<std::size_t>(outcome_card),
            static_cast<std::size_t>(outcome_card)};
}

double Cpt::at(int outcome, std::span<const int> conds) const {
    return column(condition_index(conds))[static_cast<std::size_t>(outcome)];
}

void Cpt::set_column(std::size_t cond_index, std::span<const double> probs) {
    if (probs.size() != static_cast<std::size_t>(outcome_card))
        throw DimensionError("Cpt: column length mismatch");
    std::copy(probs.begin(), probs.end(), column(cond_index).begin());
}

void Cpt::validate(double tol) const {
    for (std::size_t c = 0; c < n_conditions(); ++c) {
        auto col = column(c);
        double sum = 0.0;
        for (double p : col) {
            if (!(p >= 0.0)) throw NormalizationError("Cpt: negative entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol)
            throw NormalizationError("Cpt: column does not sum to 1");
    }
}

Categorical normalize(std::span<const double> v) {
    if (v.empty()) throw NormalizationError("normalize: empty vector");
    double sum = 0.0;
    for (double x : v) {
        if (x < 0.0) throw NormalizationError("normalize: negative entry");
        sum += x;
    }
    if (sum <= 0.0) throw NormalizationError("normalize: zero total mass");
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x /= sum;
    return Categorical(std::move(out));
}

double kl_divergence(const Categorical& p, const Categorical& q) {
    if (p.size() != q.size()) throw DimensionError("kl_divergence: length mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue; // 0 ln(0/x) = 0
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) h -= x * std::log(x);
    }
    return std::max(h, 0.0);
}

double entropy(const Categorical& p) {
    return entropy(std::span<const double>(p.probs));
}

Categorical softmax(std::span<const double> values, double precision) {
    if (values.empty()) throw ParameterError("softmax: empty input");
    double vmax = -std::numeric_limits<double>::infinity();
    for (double v : values) vmax = std::max(vmax, precision * v);
    std::vector<double> out(values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = std::exp(precision * values[i] - vmax);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return Categorical(std::move(out));
}

Categorical discretized_gaussian_absorbing(double center, double sigma, int n) {
    if (sigma <= 0.0)
        throw ParameterError("discretized_gaussian_absorbing: sigma must be > 0");
    if (n < 1) throw ParameterError("discretized_gaussian_absorbing: support must be >= 1");
    const int pad = std::max(1, static_cast<int>(std::ceil(6.0 * sigma)));
    std::vector<double> ex;
    ex.reserve(static_cast<std::size_t>(n + 2 * pad));
    double emax = -std::numeric_limits<double>::infinity();
    for (int i = -pad; i < n + pad; ++i) {
        const double d = static_cast<double>(i) - center;
        ex.push_back(-(d * d) / (2.0 * sigma * sigma));
        emax = std::max(emax, ex.back());
    }
    double sum = 0.0;
    for (double& e : ex) {
        e = std::exp(e - emax);
        sum += e;
    }
    std::vector<double> probs(static_cast<std::size_t>(n), 0.0);
    for (int i = -pad; i < n + pad; ++i) {
        const int clamped = std::clamp(i, 0, n - 1);
        probs[static_cast<std::size_t>(clamped)] +=
            ex[static_cast<std::size_t>(i + pad)] / sum;
    }
    return Categorical(std::move(probs));
}

Categorical discretized_gaussian(double center, double sigma, int n) {
    if (sigma <= 0.0) throw ParameterError("discretized_gaussian: sigma must be > 0");
    if (n < 1) throw ParameterError("discretized_gaussian: support must be >= 1");
    // Work with max-shifted exponents so the largest entry is exp(0); keeps a
    // far-off-support center from underflowing the whole vector.
    std::vector<double> ex(static_cast<std::size_t>(n));
    double emax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double d = static_cast<double>(i) - center;
        ex[static_cast<std::size_t>(i)] = -(d * d) / (2.0 * sigma * sigma);
        emax = std::max(emax, ex[static_cast<std::size_t>(i)]);
    }
    double sum = 0.0;
    for (double& e : ex) {
        e = std::exp(e - emax);
        sum += e;
    }
    for (double& e : ex) e /= sum;
    return Categorical(std::move(ex));
}

} // namespace aif
