#ifndef AIF_SRP_HPP
#define AIF_SRP_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aif/errors.hpp"

namespace aif {

enum class DriftStatus { stable, warning, drift };

/// ADWIN change detector over a stream of error values. Keeps an exponential
/// histogram of buckets; memory stays O(log window) while every admissible
/// head/tail cut can still be tested exactly.
class AdwinDetector {
  public:
    explicit AdwinDetector(double delta = 0.002, int window_cap = 4096,
                           int max_buckets_per_row = 5);

    DriftStatus update(double value);

    std::size_t window_length() const { return width_; }
    double window_mean() const { return width_ ? sum_ / static_cast<double>(width_) : 0.0; }
    double window_variance() const;
    std::size_t bucket_count() const;

  private:
    struct Bucket {
        double sum = 0.0;
        double m2 = 0.0; // sum of squared deviations within the bucket
    };

    void insert_point(double value);
    void compress();
    void recompute_totals();
    // Scans oldest-to-newest; returns the element count of the older
    // sub-window whose cut fires at confidence delta, or 0.
    std::size_t find_cut(double delta) const;
    void drop_oldest(std::size_t elements);

    double delta_;
    std::size_t window_cap_;
    std::size_t max_per_row_;
    // rows_[r] holds buckets of 2^r elements, oldest first.
    std::vector<std::vector<Bucket>> rows_;
    std::size_t width_ = 0;
    double sum_ = 0.0;
    double m2_ = 0.0;
};

struct TreeConfig {
    int grace_period = 50;
    double split_confidence = 1e-3;
    double tie_threshold = 0.05;
    int n_thresholds = 10;
    int max_depth = 12;
    int min_samples_per_side = 5;
    int candidate_init_count = 10;
};

/// Incremental regression tree: splits when the Hoeffding bound separates the
/// best variance-reduction candidate from the runner-up. Numeric features use
/// Gaussian-approximation quantile thresholds fixed per leaf.
class HoeffdingTreeRegressor {
  public:
    HoeffdingTreeRegressor(TreeConfig cfg, std::vector<std::size_t> feature_mask);

    double predict(std::span<const double> x) const;
    void learn(std::span<const double> x, double y);

    const std::vector<std::size_t>& mask() const { return mask_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const;

  private:
    struct TargetStats {
        double n = 0.0;
        double sum = 0.0;
        double sum_sq = 0.0;
        void add(double y);
        double mean() const { return n > 0.0 ? sum / n : 0.0; }
        double sd() const;
    };
    struct FeatureStats {
        double n = 0.0;
        double mean = 0.0;
        double m2 = 0.0;
        std::vector<double> thresholds;
        std::vector<TargetStats> left, right;
        void observe(double x);
        double sd() const;
    };
    struct Node {
        bool leaf = true;
        int split_feature = -1; // index into mask_
        double split_threshold = 0.0;
        int left = -1, right = -1;
        int depth = 0;
        double fallback = 0.0; // prediction before any data reaches the leaf
        TargetStats stats;
        std::vector<FeatureStats> feats; // one per masked feature
        double seen_since_attempt = 0.0;
    };

    int route(std::span<const double> x) const;
    void try_split(int node_index);

    TreeConfig cfg_;
    std::vector<std::size_t> mask_;
    std::vector<Node> nodes_;

    friend class SrpEnsemble;
};

struct Instance {
    std::vector<double> features;
    double target = 0.0;
};

struct SrpConfig {
    int n_learners = 10;
    int max_features = 3;
    double poisson_lambda = 6.0;
    double adwin_delta = 0.002;
    int adwin_window_cap = 4096;
    TreeConfig tree;
};

/// Streaming random patches regressor: online Poisson bagging over Hoeffding
/// trees on random feature subsets, with per-learner ADWIN warning/drift
/// handling and background-learner replacement.
class SrpEnsemble {
  public:
    SrpEnsemble(SrpConfig cfg, std::size_t n_features, std::uint64_t seed);

    double predict(std::span<const double> features) const;
    void learn(const Instance& inst);
    /// Initialization pass: every tree trains once, detectors stay cold.
    void pretrain(const Instance& inst);
    double estimate_intercept() const;

    std::size_t n_learners() const { return slots_.size(); }
    std::size_t n_features() const { return n_features_; }
    int drift_count() const { return drift_count_; }
    int warning_count() const { return warning_count_; }
    std::string dump_state() const;

  private:
    struct Slot {
        HoeffdingTreeRegressor tree;
        AdwinDetector detector;
        std::optional<HoeffdingTreeRegressor> background;
    };

    HoeffdingTreeRegressor make_tree(const std::vector<std::size_t>& mask) const;
    int poisson(double lambda);

    SrpConfig cfg_;
    std::size_t n_features_;
    std::mt19937_64 rng_;
    std::vector<Slot> slots_;
    int drift_count_ = 0;
    int warning_count_ = 0;
};

// Free-function spellings used by the driver code.
DriftStatus adwin_update(AdwinDetector& det, double value);
void srp_learn(SrpEnsemble& ens, const Instance& inst);
double srp_predict(const SrpEnsemble& ens, std::span<const double> features);
double estimate_intercept(const SrpEnsemble& ens, std::size_t n_firms);

} // namespace aif

#endif
