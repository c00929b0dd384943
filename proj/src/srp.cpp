#include "aif/srp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace aif {

// ---------------------------------------------------------------------------
// AdwinDetector

AdwinDetector::AdwinDetector(double delta, int window_cap, int max_buckets_per_row)
    : delta_(delta), window_cap_(static_cast<std::size_t>(window_cap)),
      max_per_row_(static_cast<std::size_t>(max_buckets_per_row)) {
    if (delta <= 0.0 || delta >= 1.0)
        throw ParameterError("AdwinDetector: delta must be in (0,1)");
    if (window_cap < 8) throw ParameterError("AdwinDetector: window cap too small");
    rows_.emplace_back();
}

void AdwinDetector::insert_point(double value) {
    rows_[0].push_back(Bucket{value, 0.0});
    compress();
    recompute_totals();
}

void AdwinDetector::compress() {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].size() <= max_per_row_) continue;
        if (r + 1 == rows_.size()) rows_.emplace_back();
        // Merge the two oldest buckets of this row into the next row.
        const Bucket a = rows_[r][0];
        const Bucket b = rows_[r][1];
        rows_[r].erase(rows_[r].begin(), rows_[r].begin() + 2);
        const double n = static_cast<double>(std::size_t{1} << r);
        const double mean_a = a.sum / n;
        const double mean_b = b.sum / n;
        Bucket merged;
        merged.sum = a.sum + b.sum;
        merged.m2 = a.m2 + b.m2 + (n * n / (2.0 * n)) * (mean_a - mean_b) * (mean_a - mean_b);
        rows_[r + 1].push_back(merged);
    }
}

void AdwinDetector::recompute_totals() {
    width_ = 0;
    sum_ = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    double count = 0.0;
    for (std::size_t r = rows_.size(); r-- > 0;) {
        const double bn = static_cast<double>(std::size_t{1} << r);
        for (const Bucket& b : rows_[r]) {
            const double bmean = b.sum / bn;
            if (count == 0.0) {
                mean = bmean;
                m2 = b.m2;
            } else {
                const double d = bmean - mean;
                m2 += b.m2 + (count * bn / (count + bn)) * d * d;
                mean += d * bn / (count + bn);
            }
            count += bn;
            width_ += static_cast<std::size_t>(bn);
            sum_ += b.sum;
        }
    }
    m2_ = std::max(m2, 0.0);
}

double AdwinDetector::window_variance() const {
    return width_ ? m2_ / static_cast<double>(width_) : 0.0;
}

std::size_t AdwinDetector::bucket_count() const {
    std::size_t n = 0;
    for (const auto& row : rows_) n += row.size();
    return n;
}

std::size_t AdwinDetector::find_cut(double delta) const {
    // Small enough that a level shift is confirmable within a few inserts;
    // the variance term keeps tiny sub-windows from cutting spuriously.
    constexpr double kMinSubWindow = 2.0;
    if (width_ < 2 * static_cast<std::size_t>(kMinSubWindow)) return 0;
    const double n_total = static_cast<double>(width_);
    const double variance = window_variance();
    const double dd = std::log(2.0 * std::log(n_total) / delta);

    double n0 = 0.0, sum0 = 0.0;
    // Oldest bucket first: highest row, front of the row.
    for (std::size_t r = rows_.size(); r-- > 0;) {
        const double bn = static_cast<double>(std::size_t{1} << r);
        for (const Bucket& b : rows_[r]) {
            n0 += bn;
            sum0 += b.sum;
            const double n1 = n_total - n0;
            if (n0 < kMinSubWindow) continue;
            if (n1 < kMinSubWindow) break;
            const double mean0 = sum0 / n0;
            const double mean1 = (sum_ - sum0) / n1;
            const double m = 1.0 / (n0 - kMinSubWindow + 1.0) + 1.0 / (n1 - kMinSubWindow + 1.0);
            const double eps = std::sqrt(2.0 * m * variance * dd) + (2.0 / 3.0) * m * dd;
            if (std::abs(mean0 - mean1) > eps) return static_cast<std::size_t>(n0);
        }
    }
    return 0;
}

void AdwinDetector::drop_oldest(std::size_t elements) {
    // Buckets are indivisible: the request rounds up to the next boundary.
    std::size_t remaining = elements;
    for (std::size_t r = rows_.size(); r-- > 0 && remaining > 0;) {
        const std::size_t bn = std::size_t{1} << r;
        while (!rows_[r].empty() && remaining > 0) {
            rows_[r].erase(rows_[r].begin());
            remaining -= std::min(remaining, bn);
        }
    }
    recompute_totals();
}

DriftStatus AdwinDetector::update(double value) {
    insert_point(value);
    if (width_ > window_cap_) drop_oldest(width_ - window_cap_);

    const std::size_t cut = find_cut(delta_);
    if (cut > 0) {
        drop_oldest(cut);
        return DriftStatus::drift;
    }
    if (find_cut(std::min(10.0 * delta_, 0.5)) > 0) return DriftStatus::warning;
    return DriftStatus::stable;
}

// ---------------------------------------------------------------------------
// HoeffdingTreeRegressor

void HoeffdingTreeRegressor::TargetStats::add(double y) {
    n += 1.0;
    sum += y;
    sum_sq += y * y;
}

double HoeffdingTreeRegressor::TargetStats::sd() const {
    if (n < 2.0) return 0.0;
    const double m = sum / n;
    return std::sqrt(std::max(sum_sq / n - m * m, 0.0));
}

void HoeffdingTreeRegressor::FeatureStats::observe(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
}

double HoeffdingTreeRegressor::FeatureStats::sd() const {
    return n > 1.0 ? std::sqrt(std::max(m2 / n, 0.0)) : 0.0;
}

HoeffdingTreeRegressor::HoeffdingTreeRegressor(TreeConfig cfg,
                                               std::vector<std::size_t> feature_mask)
    : cfg_(cfg), mask_(std::move(feature_mask)) {
    if (mask_.empty()) throw ParameterError("HoeffdingTreeRegressor: empty feature mask");
    Node root;
    root.feats.resize(mask_.size());
    nodes_.push_back(std::move(root));
}

int HoeffdingTreeRegressor::route(std::span<const double> x) const {
    int idx = 0;
    while (!nodes_[static_cast<std::size_t>(idx)].leaf) {
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        const double v = x[mask_[static_cast<std::size_t>(n.split_feature)]];
        idx = v <= n.split_threshold ? n.left : n.right;
    }
    return idx;
}

double HoeffdingTreeRegressor::predict(std::span<const double> x) const {
    const Node& leaf = nodes_[static_cast<std::size_t>(route(x))];
    return leaf.stats.n > 0.0 ? leaf.stats.mean() : leaf.fallback;
}

void HoeffdingTreeRegressor::learn(std::span<const double> x, double y) {
    for (std::size_t f : mask_) {
        if (f >= x.size()) throw DimensionError("HoeffdingTreeRegressor: feature index out of range");
    }
    const int leaf_index = route(x);
    Node& leaf = nodes_[static_cast<std::size_t>(leaf_index)];
    leaf.stats.add(y);
    leaf.seen_since_attempt += 1.0;

    for (std::size_t i = 0; i < mask_.size(); ++i) {
        FeatureStats& fs = leaf.feats[i];
        const double v = x[mask_[i]];
        fs.observe(v);
        // Candidate thresholds are pinned once the Gaussian estimate has a
        // little support; afterwards per-side target stats accumulate.
        if (fs.thresholds.empty() && fs.n >= cfg_.candidate_init_count && fs.sd() > 0.0) {
            static constexpr double kZ[10] = {-1.6449, -1.0364, -0.6745, -0.3853, -0.1257,
                                              0.1257,  0.3853,  0.6745,  1.0364,  1.6449};
            fs.thresholds.reserve(static_cast<std::size_t>(cfg_.n_thresholds));
            for (int t = 0; t < cfg_.n_thresholds; ++t)
                fs.thresholds.push_back(fs.mean + kZ[t % 10] * fs.sd());
            fs.left.assign(fs.thresholds.size(), {});
            fs.right.assign(fs.thresholds.size(), {});
        }
        for (std::size_t t = 0; t < fs.thresholds.size(); ++t) {
            (v <= fs.thresholds[t] ? fs.left[t] : fs.right[t]).add(y);
        }
    }

    if (leaf.seen_since_attempt >= cfg_.grace_period && leaf.depth < cfg_.max_depth) {
        leaf.seen_since_attempt = 0.0;
        try_split(leaf_index);
    }
}

void HoeffdingTreeRegressor::try_split(int node_index) {
    Node& leaf = nodes_[static_cast<std::size_t>(node_index)];
    const double parent_sd = leaf.stats.sd();
    if (parent_sd <= 0.0) return;

    // One candidate per feature (its best threshold); the Hoeffding bound
    // compares across features, with a merit-0 no-split baseline.
    double best = 0.0, second = 0.0;
    int best_feature = -1;
    std::size_t best_threshold = 0;
    for (std::size_t i = 0; i < leaf.feats.size(); ++i) {
        const FeatureStats& fs = leaf.feats[i];
        double feature_best = 0.0;
        std::size_t feature_threshold = 0;
        bool any = false;
        for (std::size_t t = 0; t < fs.thresholds.size(); ++t) {
            const TargetStats& l = fs.left[t];
            const TargetStats& r = fs.right[t];
            if (l.n < cfg_.min_samples_per_side || r.n < cfg_.min_samples_per_side) continue;
            const double total = l.n + r.n;
            const double sdr = parent_sd - (l.n / total) * l.sd() - (r.n / total) * r.sd();
            if (!any || sdr > feature_best) {
                feature_best = sdr;
                feature_threshold = t;
                any = true;
            }
        }
        if (!any) continue;
        if (best_feature < 0 || feature_best > best) {
            second = best_feature < 0 ? 0.0 : best;
            best = feature_best;
            best_feature = static_cast<int>(i);
            best_threshold = feature_threshold;
        } else if (feature_best > second) {
            second = feature_best;
        }
    }
    if (best_feature < 0 || best <= 0.0) return;

    const double n = leaf.stats.n;
    const double eps = std::sqrt(std::log(1.0 / cfg_.split_confidence) / (2.0 * n));
    const double ratio = second / best;
    if (!(ratio < 1.0 - eps || eps < cfg_.tie_threshold)) return;

    const FeatureStats& fs = leaf.feats[static_cast<std::size_t>(best_feature)];
    Node left, right;
    left.depth = right.depth = leaf.depth + 1;
    left.fallback = fs.left[best_threshold].n > 0.0 ? fs.left[best_threshold].mean()
                                                    : leaf.stats.mean();
    right.fallback = fs.right[best_threshold].n > 0.0 ? fs.right[best_threshold].mean()
                                                      : leaf.stats.mean();
    left.feats.resize(mask_.size());
    right.feats.resize(mask_.size());

    const double threshold = fs.thresholds[best_threshold];
    const int left_index = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(left));
    const int right_index = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(right));

    Node& parent = nodes_[static_cast<std::size_t>(node_index)]; // vector may have grown
    parent.leaf = false;
    parent.split_feature = best_feature;
    parent.split_threshold = threshold;
    parent.left = left_index;
    parent.right = right_index;
    parent.feats.clear();
    parent.feats.shrink_to_fit();
}

std::size_t HoeffdingTreeRegressor::leaf_count() const {
    std::size_t n = 0;
    for (const Node& node : nodes_)
        if (node.leaf) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// SrpEnsemble

SrpEnsemble::SrpEnsemble(SrpConfig cfg, std::size_t n_features, std::uint64_t seed)
    : cfg_(cfg), n_features_(n_features), rng_(seed) {
    if (cfg_.n_learners < 1) throw ParameterError("SrpEnsemble: need at least one learner");
    if (n_features_ < 1) throw ParameterError("SrpEnsemble: need at least one feature");

    const std::size_t m = std::min<std::size_t>(
        n_features_, static_cast<std::size_t>(std::max(cfg_.max_features, 1)));
    slots_.reserve(static_cast<std::size_t>(cfg_.n_learners));
    for (int i = 0; i < cfg_.n_learners; ++i) {
        std::vector<std::size_t> mask(n_features_);
        std::iota(mask.begin(), mask.end(), std::size_t{0});
        if (m < n_features_) {
            // Partial Fisher-Yates draw of m distinct feature indices.
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t k = j + rng_() % (n_features_ - j);
                std::swap(mask[j], mask[k]);
            }
            mask.resize(m);
            std::sort(mask.begin(), mask.end());
        }
        slots_.push_back(Slot{make_tree(mask), AdwinDetector(cfg_.adwin_delta, cfg_.adwin_window_cap),
                              std::nullopt});
    }
}

HoeffdingTreeRegressor SrpEnsemble::make_tree(const std::vector<std::size_t>& mask) const {
    return HoeffdingTreeRegressor(cfg_.tree, mask);
}

int SrpEnsemble::poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    double p = 1.0;
    int k = 0;
    do {
        ++k;
        p *= static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    } while (p > limit);
    return k - 1;
}

double SrpEnsemble::predict(std::span<const double> features) const {
    if (features.size() != n_features_)
        throw DimensionError("SrpEnsemble::predict: feature length mismatch");
    double sum = 0.0;
    for (const Slot& slot : slots_) sum += slot.tree.predict(features);
    return sum / static_cast<double>(slots_.size());
}

void SrpEnsemble::learn(const Instance& inst) {
    if (inst.features.size() != n_features_)
        throw DimensionError("SrpEnsemble::learn: feature length mismatch");
    const std::span<const double> x(inst.features);

    for (Slot& slot : slots_) {
        const double pred = slot.tree.predict(x);
        const double mean_before = slot.detector.window_mean();
        DriftStatus status = slot.detector.update(std::abs(pred - inst.target));
        // A falling error mean is the learner improving, not concept drift.
        if (status != DriftStatus::stable && slot.detector.window_mean() <= mean_before)
            status = DriftStatus::stable;

        const int k = poisson(cfg_.poisson_lambda);
        for (int i = 0; i < k; ++i) slot.tree.learn(x, inst.target);

        if (status == DriftStatus::warning) {
            ++warning_count_;
            if (!slot.background) slot.background.emplace(make_tree(slot.tree.mask()));
        } else if (status == DriftStatus::drift) {
            ++drift_count_;
            if (slot.background) {
                slot.tree = std::move(*slot.background);
                slot.background.reset();
            } else {
                // Drift without a prior warning: start fresh, but give the
                // replacement the current instance so it does not answer 0
                // until the next one arrives.
                slot.tree = make_tree(slot.tree.mask());
                slot.tree.learn(x, inst.target);
            }
            slot.detector = AdwinDetector(cfg_.adwin_delta, cfg_.adwin_window_cap);
        }
    }
    for (Slot& slot : slots_) {
        if (slot.background) slot.background->learn(x, inst.target);
    }
}

void SrpEnsemble::pretrain(const Instance& inst) {
    if (inst.features.size() != n_features_)
        throw DimensionError("SrpEnsemble::pretrain: feature length mismatch");
    const std::span<const double> x(inst.features);
    for (Slot& slot : slots_) slot.tree.learn(x, inst.target);
}

double SrpEnsemble::estimate_intercept() const {
    return predict(std::vector<double>(n_features_, 0.0));
}

std::string SrpEnsemble::dump_state() const {
    nlohmann::json j;
    j["n_learners"] = slots_.size();
    j["n_features"] = n_features_;
    j["drift_count"] = drift_count_;
    j["warning_count"] = warning_count_;
    auto& learners = j["learners"];
    learners = nlohmann::json::array();
    for (const Slot& slot : slots_) {
        nlohmann::json l;
        l["mask"] = slot.tree.mask();
        l["nodes"] = slot.tree.node_count();
        l["leaves"] = slot.tree.leaf_count();
        l["has_background"] = slot.background.has_value();
        l["detector"] = {{"window", slot.detector.window_length()},
                         {"mean", slot.detector.window_mean()},
                         {"variance", slot.detector.window_variance()},
                         {"buckets", slot.detector.bucket_count()}};
        learners.push_back(std::move(l));
    }
    return j.dump(2);
}

DriftStatus adwin_update(AdwinDetector& det, double value) { return det.update(value); }

void srp_learn(SrpEnsemble& ens, const Instance& inst) { ens.learn(inst); }

double srp_predict(const SrpEnsemble& ens, std::span<const double> features) {
    return ens.predict(features);
}

double estimate_intercept(const SrpEnsemble& ens, std::size_t n_firms) {
    if (n_firms != ens.n_features())
        throw DimensionError("estimate_intercept: firm count != feature count");
    return ens.estimate_intercept();
}

} // namespace aif
