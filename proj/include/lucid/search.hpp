// The feature-search loop: pick a random positive seed, saturate it, run a
// breadth-first refinement over the bottom clause, score every candidate by
// retraining, and accept the best one if it clears the relative improvement
// threshold. With cluster invention enabled, promising constant-bearing
// rules are additionally rewritten into cluster-bearing variants before the
// best candidate is chosen.
#pragma once

#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "lucid/bottom.hpp"
#include "lucid/invention.hpp"
#include "lucid/rng.hpp"
#include "lucid/scoring.hpp"

namespace lucid {

struct SearchConfig {
    uint32_t max_iterations = 15;
    double threshold = 0.02;  // relative tune-score improvement required to accept
    uint32_t depth_limit = 2;
    uint32_t body_length_limit = 4;
    uint32_t bottom_width_limit = 5000;
    uint32_t candidate_cap = 5000;  // per-iteration breadth-first cap
    uint32_t quantiles = 10;        // comparison-threshold quantiles
    uint32_t near_miss_cap = 50;
    uint32_t rewrite_fanout = 3;     // constants rewritten per rule
    uint32_t rewrite_rules_cap = 8;  // rules rewritten per iteration
    double smoothing = 1.0;
    bool invent_clusters = false;
    bool latent_enabled = true;  // master switch for cluster-eligible types
    uint64_t seed = 0;
};

struct TraceRecord {
    uint32_t iteration = 0;
    std::string seed;
    size_t n_candidates = 0;
    std::string best_feature;
    double old_score = 0.0;
    double new_score = 0.0;
    bool accepted = false;
};

struct SearchState {
    std::vector<Feature> fs;
    std::vector<std::string> fs_texts;
    double current_score = 0.0;
    std::vector<double> accepted_scores;  // non-decreasing by the acceptance gate
    uint32_t iteration = 0;
    Rng rng;
    ClusterRegistry registry;
    ClusterFacts committed;
};

inline bool passes_gate(double old_score, double new_score, double threshold) {
    return new_score >= old_score * (1.0 + threshold);
}

inline ConstIdx pick_seed(Rng& rng, const std::vector<ConstIdx>& positives) {
    if (positives.empty()) throw DataError("no positive examples to seed from");
    return positives[static_cast<size_t>(rng.bounded(positives.size()))];
}

struct Candidate {
    Feature feature;
    size_t parent = std::numeric_limits<size_t>::max();
    std::string text;  // normalized print form, used for dedup and tie-breaks
    FeatureColumns cols;
    double score = -1.0;
    bool has_cluster = false;
    ClusterDef cluster;
};

// Breadth-first enumeration over refine() from the empty-body root, dropping
// syntactic duplicates after variable normalization.
inline std::vector<Candidate> enumerate_candidates(const BottomClause& bottom, const FactBase& fb,
                                                   uint32_t body_limit, uint32_t cap) {
    std::vector<Candidate> out;
    std::unordered_set<std::string> seen;
    Candidate root;
    root.feature.head = bottom.head;
    root.text = feature_text(fb, root.feature);
    seen.insert(root.text);
    out.push_back(std::move(root));

    for (size_t i = 0; i < out.size() && out.size() < cap; ++i) {
        if (out[i].feature.body.size() >= body_limit) continue;
        for (Feature& child : refine(out[i].feature, bottom)) {
            std::string text = feature_text(fb, child);
            if (!seen.insert(text).second) continue;
            Candidate c;
            c.feature = std::move(child);
            c.parent = i;
            c.text = std::move(text);
            out.push_back(std::move(c));
            if (out.size() >= cap) break;
        }
    }
    return out;
}

// Spec-facing wrapper: the candidate feature list for one seed.
inline std::vector<Feature> generate_candidates(ConstIdx seed, const FactBase& fb,
                                                const SearchConfig& cfg,
                                                const ComparisonThresholds& thresholds) {
    BottomConfig bc{cfg.depth_limit, cfg.bottom_width_limit, &thresholds};
    BottomClause bottom = saturate(seed, fb, bc);
    std::vector<Feature> out;
    for (Candidate& c : enumerate_candidates(bottom, fb, cfg.body_length_limit, cfg.candidate_cap))
        out.push_back(std::move(c.feature));
    return out;
}

// Deterministic argmax: higher score, then shorter body, then lexicographic
// print form. Returns the index or SIZE_MAX when empty.
inline size_t best_candidate(const std::vector<Candidate>& cands) {
    size_t best = std::numeric_limits<size_t>::max();
    for (size_t i = 0; i < cands.size(); ++i) {
        if (best == std::numeric_limits<size_t>::max()) {
            best = i;
            continue;
        }
        const Candidate& a = cands[i];
        const Candidate& b = cands[best];
        if (a.score != b.score) {
            if (a.score > b.score) best = i;
            continue;
        }
        if (a.feature.body.size() != b.feature.body.size()) {
            if (a.feature.body.size() < b.feature.body.size()) best = i;
            continue;
        }
        if (a.text < b.text) best = i;
    }
    return best;
}

class SearchEngine {
public:
    SearchEngine(const FactBase& fb, SplitView train, SplitView tune, const SearchConfig& cfg)
        : fb_(fb), cfg_(cfg), scorer_(fb, std::move(train), std::move(tune), cfg.smoothing) {
        state_.rng = Rng(cfg.seed);
        for (size_t i = 0; i < scorer_.train().size(); ++i)
            if (scorer_.train().labels[i]) train_positives_.push_back(scorer_.train().examples[i]);
        thresholds_ = compute_thresholds(fb_, scorer_.train().examples, cfg_.quantiles);
        state_.committed = state_.registry.materialize();
        state_.current_score = scorer_.score().auc_pr;
    }

    void run() {
        for (uint32_t i = 0; i < cfg_.max_iterations; ++i) iterate();
    }

    void iterate() {
        ConstIdx seed = pick_seed(state_.rng, train_positives_);
        BottomConfig bc{cfg_.depth_limit, cfg_.bottom_width_limit, &thresholds_};
        BottomClause bottom = saturate(seed, fb_, bc);
        std::vector<Candidate> cands =
            enumerate_candidates(bottom, fb_, cfg_.body_length_limit, cfg_.candidate_cap);
        attach_columns(cands);
        score_candidates(cands);
        if (on_base_candidates) on_base_candidates(state_.iteration, cands);
        if (cfg_.invent_clusters && cfg_.latent_enabled) add_rewrites(cands);

        TraceRecord rec;
        rec.iteration = state_.iteration;
        rec.seed = fb_.const_symbol(fb_.example_type(), seed);
        rec.n_candidates = cands.size();
        rec.old_score = state_.current_score;
        rec.new_score = state_.current_score;

        size_t best = best_candidate(cands);
        if (best != std::numeric_limits<size_t>::max()) {
            rec.best_feature = cands[best].text;
            if (passes_gate(state_.current_score, cands[best].score, cfg_.threshold)) {
                accept(cands[best]);
                rec.new_score = state_.current_score;
                rec.accepted = true;
            }
        }
        trace_.push_back(std::move(rec));
        ++state_.iteration;
    }

    const SearchState& state() const { return state_; }
    Scorer& scorer() { return scorer_; }
    const std::vector<TraceRecord>& trace() const { return trace_; }
    const ComparisonThresholds& thresholds() const { return thresholds_; }

    // Test hook: observes the scored base candidate set of each iteration,
    // before any cluster rewriting.
    std::function<void(uint32_t, const std::vector<Candidate>&)> on_base_candidates;

private:
    void attach_columns(std::vector<Candidate>& cands) {
        for (size_t i = 0; i < cands.size(); ++i) {
            if (cands[i].parent == std::numeric_limits<size_t>::max()) {
                // Empty-body root covers everything.
                BitColumn train(static_cast<uint32_t>(scorer_.train().size()));
                BitColumn tune(static_cast<uint32_t>(scorer_.tune().size()));
                for (uint32_t r = 0; r < train.size(); ++r) train.set(r);
                for (uint32_t r = 0; r < tune.size(); ++r) tune.set(r);
                cands[i].cols = {std::move(train), std::move(tune)};
            } else {
                cands[i].cols = scorer_.make_columns_within(cands[i].feature, state_.committed,
                                                            cands[cands[i].parent].cols);
            }
        }
    }

    // Candidates with identical columns produce identical retrained models;
    // score each distinct column once.
    void score_candidates(std::vector<Candidate>& cands) {
        std::unordered_map<uint64_t, std::vector<std::pair<size_t, double>>> groups;
        for (size_t i = 0; i < cands.size(); ++i) {
            uint64_t h = cands[i].cols.hash();
            auto& bucket = groups[h];
            double score = -1.0;
            for (auto& [idx, s] : bucket)
                if (cands[idx].cols == cands[i].cols) {
                    score = s;
                    break;
                }
            if (score < 0.0) {
                score = scorer_.score(&cands[i].cols).auc_pr;
                bucket.emplace_back(i, score);
            }
            cands[i].score = score;
        }
    }

    // Latent-type constants in the body, most recently added literals first.
    std::vector<std::pair<TypeId, ConstIdx>> eligible_constants(const Feature& f) const {
        std::vector<std::pair<TypeId, ConstIdx>> out;
        for (auto it = f.body.rbegin(); it != f.body.rend(); ++it) {
            for (const Term& t : it->args) {
                if (!t.is_const() || !fb_.type(t.type).latent) continue;
                std::pair<TypeId, ConstIdx> key{t.type, t.id};
                if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
            }
        }
        if (out.size() > cfg_.rewrite_fanout) out.resize(cfg_.rewrite_fanout);
        return out;
    }

    // Condition 1: the rule improves the current model score. Condition 2:
    // it carries a constant of a latent type. The highest-scoring such rules
    // are rewritten, each producing one cluster-bearing candidate per
    // eligible constant.
    void add_rewrites(std::vector<Candidate>& cands) {
        std::vector<size_t> eligible;
        for (size_t i = 0; i < cands.size(); ++i) {
            if (cands[i].score <= state_.current_score) continue;
            if (eligible_constants(cands[i].feature).empty()) continue;
            eligible.push_back(i);
        }
        std::sort(eligible.begin(), eligible.end(), [&cands](size_t a, size_t b) {
            if (cands[a].score != cands[b].score) return cands[a].score > cands[b].score;
            if (cands[a].feature.body.size() != cands[b].feature.body.size())
                return cands[a].feature.body.size() < cands[b].feature.body.size();
            return cands[a].text < cands[b].text;
        });
        if (eligible.size() > cfg_.rewrite_rules_cap) eligible.resize(cfg_.rewrite_rules_cap);

        for (size_t idx : eligible) {
            Feature base = cands[idx].feature;  // copy: cands may reallocate
            for (auto [ctype, c] : eligible_constants(base)) {
                RewriteOutcome rw = rewrite_rule(base, ctype, c, state_.registry, scorer_,
                                                 state_.committed, cfg_.near_miss_cap);
                Candidate nc;
                nc.text = feature_text(fb_, rw.feature);
                nc.feature = std::move(rw.feature);
                nc.cols = std::move(rw.cols);
                nc.score = rw.score;
                nc.has_cluster = true;
                nc.cluster = std::move(rw.cluster);
                cands.push_back(std::move(nc));
            }
        }
    }

    void accept(const Candidate& c) {
        state_.fs.push_back(c.feature);
        state_.fs_texts.push_back(c.text);
        scorer_.commit(c.cols);
        if (c.has_cluster) {
            ClusterDef def = c.cluster;
            def.created_iteration = state_.iteration;
            def.created_for = c.text;
            state_.registry.commit(std::move(def));
            state_.committed = state_.registry.materialize();
        }
        state_.current_score = c.score;
        state_.accepted_scores.push_back(c.score);
    }

    const FactBase& fb_;
    SearchConfig cfg_;
    Scorer scorer_;
    SearchState state_;
    std::vector<ConstIdx> train_positives_;
    ComparisonThresholds thresholds_;
    std::vector<TraceRecord> trace_;
};

}  // namespace lucid
