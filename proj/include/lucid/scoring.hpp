// Evaluate-by-retraining: propositionalize features into bit columns, train
// the TAN on the training split, and score AUC-PR on the tuning split. The
// Scorer keeps the committed feature-set columns so each candidate costs one
// column plus one retrain.
#pragma once

#include <vector>

#include "lucid/aucpr.hpp"
#include "lucid/matrix.hpp"
#include "lucid/satisfy.hpp"
#include "lucid/tan.hpp"

namespace lucid {

// Ordered examples with labels for one evaluation split.
struct SplitView {
    std::vector<ConstIdx> examples;
    std::vector<uint8_t> labels;

    size_t size() const { return examples.size(); }
    BitColumn label_column() const {
        BitColumn col(static_cast<uint32_t>(examples.size()));
        for (uint32_t i = 0; i < examples.size(); ++i)
            if (labels[i]) col.set(i);
        return col;
    }
};

inline SplitView make_split(const Dataset& ds, const std::vector<uint32_t>& indices) {
    SplitView out;
    out.examples.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (uint32_t i : indices) {
        out.examples.push_back(ds.examples[i]);
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

inline BitColumn feature_column(const Feature& f, const SplitView& split, const FactBase& fb,
                                const ClusterFacts& clusters = ClusterFacts::none()) {
    BitColumn col(static_cast<uint32_t>(split.size()));
    detail::SatSolver solver(f, fb, clusters);
    for (uint32_t i = 0; i < split.size(); ++i)
        if (solver.run(split.examples[i])) col.set(i);
    return col;
}

// Coverage restricted to rows covered by the parent; a refinement can only
// cover a subset of its parent, so the other rows need no evaluation.
inline BitColumn feature_column_within(const Feature& f, const SplitView& split,
                                       const FactBase& fb, const ClusterFacts& clusters,
                                       const BitColumn& parent) {
    BitColumn col(static_cast<uint32_t>(split.size()));
    detail::SatSolver solver(f, fb, clusters);
    for (uint32_t i = 0; i < split.size(); ++i)
        if (parent.get(i) && solver.run(split.examples[i])) col.set(i);
    return col;
}

struct FeatureColumns {
    BitColumn train;
    BitColumn tune;

    uint64_t hash() const { return train.hash() * 0x9e3779b97f4a7c15ULL ^ tune.hash(); }
    bool operator==(const FeatureColumns&) const = default;
};

// Holds the committed feature-set columns over a fixed train/tune split and
// scores extensions of that set. Mutable scratch state: one instance per
// search run, not shared across threads.
class Scorer {
public:
    Scorer(const FactBase& fb, SplitView train, SplitView tune, double smoothing = 1.0)
        : fb_(&fb), train_(std::move(train)), tune_(std::move(tune)), smoothing_(smoothing) {
        train_matrix_.n_rows = static_cast<uint32_t>(train_.size());
        train_matrix_.labels = train_.label_column();
        row_scratch_.reserve(16);
    }

    const FactBase& facts() const { return *fb_; }
    const SplitView& train() const { return train_; }
    const SplitView& tune() const { return tune_; }
    double smoothing() const { return smoothing_; }
    size_t n_committed() const { return tune_columns_.size(); }

    FeatureColumns make_columns(const Feature& f,
                                const ClusterFacts& clusters = ClusterFacts::none()) const {
        return {feature_column(f, train_, *fb_, clusters),
                feature_column(f, tune_, *fb_, clusters)};
    }

    FeatureColumns make_columns_within(const Feature& f, const ClusterFacts& clusters,
                                       const FeatureColumns& parent) const {
        return {feature_column_within(f, train_, *fb_, clusters, parent.train),
                feature_column_within(f, tune_, *fb_, clusters, parent.tune)};
    }

    void commit(const FeatureColumns& cols) {
        train_matrix_.columns.push_back(cols.train);
        tune_columns_.push_back(cols.tune);
    }

    // Tune-set AUC-PR of the committed set, optionally extended with one
    // candidate column.
    ModelScore score(const FeatureColumns* extra = nullptr) {
        if (extra) {
            train_matrix_.columns.push_back(extra->train);
            tune_columns_.push_back(extra->tune);
        }
        ModelScore out = score_committed();
        if (extra) {
            train_matrix_.columns.pop_back();
            tune_columns_.pop_back();
        }
        return out;
    }

    // TAN over the committed columns, trained on the training split.
    TanModel train_model() { return learn_tan(train_matrix_, smoothing_); }

private:
    ModelScore score_committed() {
        TanModel model = learn_tan(train_matrix_, smoothing_);
        scores_scratch_.resize(tune_.size());
        size_t k = tune_columns_.size();
        row_scratch_.resize(k);
        for (uint32_t r = 0; r < tune_.size(); ++r) {
            for (size_t j = 0; j < k; ++j) row_scratch_[j] = tune_columns_[j].get(r) ? 1 : 0;
            scores_scratch_[r] = predict(model, row_scratch_);
        }
        return auc_pr(scores_scratch_, tune_.labels);
    }

    const FactBase* fb_;
    SplitView train_;
    SplitView tune_;
    double smoothing_;
    FeatureMatrix train_matrix_;
    std::vector<BitColumn> tune_columns_;
    std::vector<uint8_t> row_scratch_;
    std::vector<double> scores_scratch_;
};

// Pure from-scratch scoring of a feature set: build the matrix via coverage,
// train on `train`, report tune-set AUC-PR.
inline ModelScore score_feature_set(const std::vector<Feature>& fs, const SplitView& train,
                                    const SplitView& tune, const FactBase& fb,
                                    const ClusterFacts& clusters = ClusterFacts::none(),
                                    double smoothing = 1.0) {
    Scorer scorer(fb, train, tune, smoothing);
    for (const Feature& f : fs) scorer.commit(scorer.make_columns(f, clusters));
    return scorer.score();
}

// Checks the FeatureMatrix consistency invariant: column j must equal the
// coverage of feature j over the split.
inline bool matrix_consistent(const FeatureMatrix& m, const std::vector<Feature>& fs,
                              const SplitView& split, const FactBase& fb,
                              const ClusterFacts& clusters = ClusterFacts::none()) {
    if (m.n_features() != fs.size()) return false;
    for (size_t j = 0; j < fs.size(); ++j)
        if (!(m.columns[j] == feature_column(fs[j], split, fb, clusters))) return false;
    return true;
}

}  // namespace lucid
