#ifndef AIF_CATEGORICAL_HPP
#define AIF_CATEGORICAL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "aif/errors.hpp"

namespace aif {

// Floor added to model probabilities before taking logs, so that hard zeros
// in likelihood/prior tables stay finite inside inference loops.
inline constexpr double kLogFloor = 1e-16;

double safe_log(double p);

/// Dense categorical distribution over a finite set of levels.
/// Entries are non-negative and sum to 1 within 1e-9.
struct Categorical {
    std::vector<double> probs;

    Categorical() = default;
    explicit Categorical(std::vector<double> p) : probs(std::move(p)) {}

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }
    double& operator[](std::size_t i) { return probs[i]; }

    bool is_valid(double tol = 1e-9) const;
    std::size_t argmax() const;
    double mean() const; // E[i] over level indices

    static Categorical delta(std::size_t n, std::size_t at);
    static Categorical uniform(std::size_t n);
};

/// Conditional probability table: one Categorical column over outcomes per
/// joint condition index. Stored row-major over conditions, column-contiguous
/// over outcomes. Condition index: last condition varies fastest.
struct Cpt {
    int outcome_card = 0;
    std::vector<int> condition_cards;
    std::vector<double> table;

    Cpt() = default;
    Cpt(int outcomes, std::vector<int> conditions);

    std::size_t n_conditions() const;
    std::size_t condition_index(std::span<const int> conds) const;

    std::span<double> column(std::size_t cond_index);
    std::span<const double> column(std::size_t cond_index) const;

    double at(int outcome, std::span<const int> conds) const;
    void set_column(std::size_t cond_index, std::span<const double> probs);

    // Every conditional column must be a valid Categorical.
    void validate(double tol = 1e-9) const;
};

Categorical normalize(std::span<const double> v);
double kl_divergence(const Categorical& p, const Categorical& q);
double entropy(const Categorical& p);
double entropy(std::span<const double> p);
Categorical softmax(std::span<const double> values, double precision);
Categorical discretized_gaussian(double center, double sigma, int n);

/// Like discretized_gaussian, but mass outside the support piles up on the
/// boundary bins instead of being spread by renormalization. Keeps the mean
/// near the center when the center sits at an edge.
Categorical discretized_gaussian_absorbing(double center, double sigma, int n);

} // namespace aif

#endif
