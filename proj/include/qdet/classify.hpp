#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "qdet/core.hpp"

namespace qdet {

inline constexpr int kFeatureCount = 9;
// f2, f3, f8 are binary; the rest are continuous.
inline constexpr std::array<bool, kFeatureCount> kBinaryFeature =
    {false, true, true, false, false, false, false, true, false};
inline const std::array<std::string, kFeatureCount> kFeatureNames =
    {"f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9"};

using FeatureRow = std::array<double, kFeatureCount>;

struct Dataset {
    std::vector<LabeledExample> examples;

    void validate() const {
        bool pos = false, neg = false;
        for (const auto& e : examples)
            (e.label == Label::InQueue ? pos : neg) = true;
        if (!pos || !neg)
            throw DataError("training set needs at least one example of each class");
    }
};

enum class ModelKind { NaiveBayes, DecisionTree, RandomForest };

inline std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::NaiveBayes: return "naive_bayes";
        case ModelKind::DecisionTree: return "decision_tree";
        case ModelKind::RandomForest: return "random_forest";
    }
    throw ConfigError("unknown model kind");
}

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "naive_bayes") return ModelKind::NaiveBayes;
    if (s == "decision_tree") return ModelKind::DecisionTree;
    if (s == "random_forest") return ModelKind::RandomForest;
    throw ConfigError("unknown model kind: " + s);
}

struct ModelSpec {
    ModelKind kind = ModelKind::RandomForest;
    int max_depth = 0;            // 0 = unlimited
    int trees = 100;
    double bag_fraction = 1.0;
    int features_per_split = 3;   // forest only; tree uses all features
    std::uint64_t seed = 0;

    void validate() const {
        if (trees < 1) throw ConfigError("forest size must be >= 1");
        if (bag_fraction <= 0.0 || bag_fraction > 1.0)
            throw ConfigError("bag_fraction must be in (0, 1]");
        if (features_per_split < 1 || features_per_split > kFeatureCount)
            throw ConfigError("features_per_split out of range");
        if (max_depth < 0) throw ConfigError("max_depth must be >= 0");
    }
};

// Fill-in values for missing fields, learned from a training set:
// missing variances become the training maximum (least queue-like),
// missing correlations become the uninformative 0.
struct Imputer {
    double max_f4 = 0.0;
    double max_f5 = 0.0;
    double max_f6 = 0.0;

    static Imputer fit(const std::vector<FeatureVector>& train) {
        Imputer im;
        for (const FeatureVector& v : train) {
            if (v.f4_var_counter) im.max_f4 = std::max(im.max_f4, *v.f4_var_counter);
            if (v.f5_var_left) im.max_f5 = std::max(im.max_f5, *v.f5_var_left);
            if (v.f6_var_right) im.max_f6 = std::max(im.max_f6, *v.f6_var_right);
        }
        return im;
    }

    FeatureRow apply(const FeatureVector& v) const {
        return {v.f1_slope,
                v.f2_approaching ? 1.0 : 0.0,
                v.f3_near_counter ? 1.0 : 0.0,
                v.f4_var_counter.value_or(max_f4),
                v.f5_var_left.value_or(max_f5),
                v.f6_var_right.value_or(max_f6),
                v.f7_stay_s,
                v.f8_mobility_similarity ? 1.0 : 0.0,
                v.f9_mobility_correlation.value_or(0.0)};
    }
};

// Single-sniffer mode: blank out everything that needs the flanking
// sniffers, leaving the counter-only features.
inline FeatureVector restrict_to_counter(FeatureVector v) {
    v.f5_var_left.reset();
    v.f6_var_right.reset();
    v.f9_mobility_correlation.reset();
    return v;
}

// ---------------------------------------------------------------------------
// Naive Bayes: Gaussian likelihoods for continuous features, Laplace-
// smoothed Bernoulli for binary ones.

struct NaiveBayesModel {
    std::array<double, 2> log_prior{};                       // [NotInQueue, InQueue]
    std::array<std::array<double, kFeatureCount>, 2> mean{};
    std::array<std::array<double, kFeatureCount>, 2> var{};  // continuous only
    std::array<std::array<double, kFeatureCount>, 2> bernoulli{}; // binary only

    static constexpr double kVarFloor = 1e-6;

    std::array<double, 2> log_posterior(const FeatureRow& row) const {
        std::array<double, 2> lp = log_prior;
        for (int c = 0; c < 2; ++c) {
            for (int f = 0; f < kFeatureCount; ++f) {
                if (kBinaryFeature[f]) {
                    double p = bernoulli[c][f];
                    lp[c] += row[f] > 0.5 ? std::log(p) : std::log(1.0 - p);
                } else {
                    double v = var[c][f];
                    double d = row[f] - mean[c][f];
                    lp[c] += -0.5 * std::log(2.0 * M_PI * v) - d * d / (2.0 * v);
                }
            }
        }
        return lp;
    }

    // Normalized class probabilities, mainly for diagnostics and tests.
    std::array<double, 2> posterior(const FeatureRow& row) const {
        auto lp = log_posterior(row);
        double m = std::max(lp[0], lp[1]);
        double e0 = std::exp(lp[0] - m), e1 = std::exp(lp[1] - m);
        return {e0 / (e0 + e1), e1 / (e0 + e1)};
    }

    Label predict(const FeatureRow& row) const {
        auto lp = log_posterior(row);
        return lp[1] > lp[0] ? Label::InQueue : Label::NotInQueue;
    }
};

inline NaiveBayesModel train_naive_bayes(const std::vector<FeatureRow>& rows,
                                         const std::vector<Label>& labels) {
    NaiveBayesModel model;
    std::array<int, 2> count{};
    for (Label l : labels) ++count[static_cast<int>(l)];
    const int n = static_cast<int>(rows.size());
    for (int c = 0; c < 2; ++c)
        model.log_prior[c] = std::log(static_cast<double>(count[c]) / n);

    for (int c = 0; c < 2; ++c) {
        for (int f = 0; f < kFeatureCount; ++f) {
            double sum = 0.0, ones = 0.0;
            for (int i = 0; i < n; ++i) {
                if (static_cast<int>(labels[i]) != c) continue;
                sum += rows[i][f];
                if (rows[i][f] > 0.5) ones += 1.0;
            }
            if (kBinaryFeature[f]) {
                model.bernoulli[c][f] = (ones + 1.0) / (count[c] + 2.0); // Laplace
            } else {
                double mean = sum / count[c];
                double ss = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (static_cast<int>(labels[i]) != c) continue;
                    ss += (rows[i][f] - mean) * (rows[i][f] - mean);
                }
                model.mean[c][f] = mean;
                model.var[c][f] = std::max(ss / count[c], NaiveBayesModel::kVarFloor);
            }
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// CART-style decision tree: greedy binary threshold splits maximizing
// information gain (entropy), optional depth limit, optional random
// feature subsetting per split (used by the forest).

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // go left when value <= threshold
    Label label = Label::NotInQueue;
    int left = -1;
    int right = -1;
};

struct DecisionTreeModel {
    std::vector<TreeNode> nodes;

    Label predict(const FeatureRow& row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].label;
    }
};

namespace detail {

inline double entropy(int pos, int n) {
    if (n == 0 || pos == 0 || pos == n) return 0.0;
    double p = static_cast<double>(pos) / n;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

struct TreeBuilder {
    const std::vector<FeatureRow>& rows;
    const std::vector<Label>& labels;
    int max_depth;
    int features_per_split; // kFeatureCount disables subsetting
    std::mt19937_64* rng;   // required when subsetting
    std::vector<TreeNode> nodes;

    Label majority(const std::vector<int>& idx) const {
        int pos = 0;
        for (int i : idx) pos += labels[i] == Label::InQueue;
        // tie goes to NotInQueue
        return 2 * pos > static_cast<int>(idx.size()) ? Label::InQueue : Label::NotInQueue;
    }

    std::vector<int> candidate_features() {
        std::vector<int> all(kFeatureCount);
        std::iota(all.begin(), all.end(), 0);
        if (features_per_split >= kFeatureCount) return all;
        // partial Fisher-Yates, then sorted for a deterministic scan order
        for (int i = 0; i < features_per_split; ++i) {
            std::uniform_int_distribution<int> pick(i, kFeatureCount - 1);
            std::swap(all[i], all[pick(*rng)]);
        }
        all.resize(features_per_split);
        std::sort(all.begin(), all.end());
        return all;
    }

    int build(std::vector<int> idx, int depth) {
        int pos = 0;
        for (int i : idx) pos += labels[i] == Label::InQueue;
        const int n = static_cast<int>(idx.size());
        const double parent_entropy = entropy(pos, n);

        bool stop = pos == 0 || pos == n || n < 2 ||
                    (max_depth > 0 && depth >= max_depth);
        int best_feature = -1;
        double best_threshold = 0.0, best_gain = 0.0;

        if (!stop) {
            for (int f : candidate_features()) {
                std::vector<std::pair<double, Label>> vals;
                vals.reserve(n);
                for (int i : idx) vals.emplace_back(rows[i][f], labels[i]);
                std::sort(vals.begin(), vals.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                int left_pos = 0;
                for (int i = 0; i + 1 < n; ++i) {
                    left_pos += vals[i].second == Label::InQueue;
                    if (vals[i].first == vals[i + 1].first) continue;
                    int nl = i + 1, nr = n - nl;
                    double gain = parent_entropy -
                                  (static_cast<double>(nl) / n) * entropy(left_pos, nl) -
                                  (static_cast<double>(nr) / n) * entropy(pos - left_pos, nr);
                    if (gain > best_gain + 1e-12) {
                        best_gain = gain;
                        best_feature = f;
                        best_threshold = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
                    }
                }
            }
        }

        int node = static_cast<int>(nodes.size());
        nodes.emplace_back();
        if (best_feature < 0) {
            nodes[node].label = majority(idx);
            return node;
        }
        std::vector<int> left, right;
        for (int i : idx)
            (rows[i][best_feature] <= best_threshold ? left : right).push_back(i);
        nodes[node].feature = best_feature;
        nodes[node].threshold = best_threshold;
        nodes[node].left = build(std::move(left), depth + 1);
        nodes[node].right = build(std::move(right), depth + 1);
        return node;
    }
};

} // namespace detail

inline DecisionTreeModel train_decision_tree(const std::vector<FeatureRow>& rows,
                                             const std::vector<Label>& labels,
                                             int max_depth = 0,
                                             int features_per_split = kFeatureCount,
                                             std::mt19937_64* rng = nullptr) {
    detail::TreeBuilder builder{rows, labels, max_depth, features_per_split, rng, {}};
    std::vector<int> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    builder.build(std::move(idx), 0);
    DecisionTreeModel model;
    model.nodes = std::move(builder.nodes);
    return model;
}

// ---------------------------------------------------------------------------
// Random forest: bagged trees with per-split feature subsetting,
// majority vote with ties broken toward NotInQueue.

struct RandomForestModel {
    std::vector<DecisionTreeModel> trees;

    Label predict(const FeatureRow& row) const {
        int pos = 0;
        for (const auto& t : trees) pos += t.predict(row) == Label::InQueue;
        return 2 * pos > static_cast<int>(trees.size()) ? Label::InQueue : Label::NotInQueue;
    }
};

inline RandomForestModel train_random_forest(const std::vector<FeatureRow>& rows,
                                             const std::vector<Label>& labels,
                                             const ModelSpec& spec) {
    RandomForestModel model;
    std::mt19937_64 rng(spec.seed);
    const int n = static_cast<int>(rows.size());
    const int bag = std::max(1, static_cast<int>(spec.bag_fraction * n + 0.5));
    for (int t = 0; t < spec.trees; ++t) {
        std::vector<FeatureRow> brows;
        std::vector<Label> blabels;
        brows.reserve(bag);
        blabels.reserve(bag);
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (int i = 0; i < bag; ++i) {
            int j = pick(rng);
            brows.push_back(rows[j]);
            blabels.push_back(labels[j]);
        }
        // bootstrap may be single-class; the tree then degenerates to a leaf
        model.trees.push_back(train_decision_tree(brows, blabels, spec.max_depth,
                                                  spec.features_per_split, &rng));
    }
    return model;
}

// ---------------------------------------------------------------------------

struct TrainedModel {
    ModelSpec spec;
    Imputer imputer;
    std::variant<NaiveBayesModel, DecisionTreeModel, RandomForestModel> model;

    Label predict_row(const FeatureRow& row) const {
        return std::visit([&](const auto& m) { return m.predict(row); }, model);
    }

    Label predict(const FeatureVector& v) const { return predict_row(imputer.apply(v)); }
};

inline TrainedModel train(const Dataset& dataset, const ModelSpec& spec) {
    spec.validate();
    dataset.validate();
    TrainedModel out;
    out.spec = spec;
    std::vector<FeatureVector> vectors;
    std::vector<Label> labels;
    for (const auto& e : dataset.examples) {
        vectors.push_back(e.features);
        labels.push_back(e.label);
    }
    out.imputer = Imputer::fit(vectors);
    std::vector<FeatureRow> rows;
    rows.reserve(vectors.size());
    for (const auto& v : vectors) rows.push_back(out.imputer.apply(v));

    switch (spec.kind) {
        case ModelKind::NaiveBayes:
            out.model = train_naive_bayes(rows, labels);
            break;
        case ModelKind::DecisionTree:
            out.model = train_decision_tree(rows, labels, spec.max_depth);
            break;
        case ModelKind::RandomForest:
            out.model = train_random_forest(rows, labels, spec);
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation: device-grouped k-fold cross validation.

struct ConfusionMatrix {
    // [actual][predicted], indexed by Label
    std::array<std::array<int, 2>, 2> counts{};

    int total() const {
        return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
    }
    double accuracy() const {
        int t = total();
        return t == 0 ? 0.0 : static_cast<double>(counts[0][0] + counts[1][1]) / t;
    }
    double precision(Label c) const {
        int i = static_cast<int>(c);
        int denom = counts[0][i] + counts[1][i];
        return denom == 0 ? 0.0 : static_cast<double>(counts[i][i]) / denom;
    }
    double recall(Label c) const {
        int i = static_cast<int>(c);
        int denom = counts[i][0] + counts[i][1];
        return denom == 0 ? 0.0 : static_cast<double>(counts[i][i]) / denom;
    }
};

struct EvalReport {
    ConfusionMatrix confusion;
    std::string sweep_axis;   // empty when not part of a sweep
    double sweep_value = 0.0;

    double accuracy() const { return confusion.accuracy(); }
};

// Deterministic device-to-fold assignment: shuffle devices with the seed,
// deal them round-robin. All windows of a device land in one fold.
inline std::vector<std::vector<DeviceId>> device_folds(const std::vector<DeviceId>& devices,
                                                       int folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("fold count must be >= 2");
    if (folds > static_cast<int>(devices.size()))
        throw ConfigError("fold count exceeds device count");
    std::vector<DeviceId> shuffled = devices;
    std::sort(shuffled.begin(), shuffled.end());
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<std::vector<DeviceId>> out(folds);
    for (std::size_t i = 0; i < shuffled.size(); ++i)
        out[i % folds].push_back(shuffled[i]);
    return out;
}

inline EvalReport evaluate(const Dataset& dataset, const ModelSpec& spec, int folds,
                           std::uint64_t seed) {
    spec.validate();
    std::set<DeviceId> device_set;
    for (const auto& e : dataset.examples) device_set.insert(e.features.device);
    std::vector<DeviceId> devices(device_set.begin(), device_set.end());
    auto fold_assignment = device_folds(devices, folds, seed);

    EvalReport report;
    for (int f = 0; f < folds; ++f) {
        std::set<DeviceId> held_out(fold_assignment[f].begin(), fold_assignment[f].end());
        Dataset train_set;
        std::vector<LabeledExample> test_set;
        for (const auto& e : dataset.examples)
            (held_out.count(e.features.device) ? test_set : train_set.examples).push_back(e);
        if (test_set.empty()) continue;
        ModelSpec fold_spec = spec;
        fold_spec.seed = seed * 1000003ULL + static_cast<std::uint64_t>(f);
        TrainedModel model = train(train_set, fold_spec);
        for (const auto& e : test_set) {
            Label predicted = model.predict(e.features);
            ++report.confusion.counts[static_cast<int>(e.label)][static_cast<int>(predicted)];
        }
    }
    return report;
}

} // namespace qdet
