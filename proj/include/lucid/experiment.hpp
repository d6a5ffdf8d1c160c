// Experiment driver: stratified cross-validation folds, per-mode runs with
// identical fold plans and per-fold RNG seeds, and report assembly.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <thread>

#include "lucid/hierarchy.hpp"
#include "lucid/search.hpp"

namespace lucid {

enum class Mode : uint8_t { vista, lucid, expert_vista, expert_lucid };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::vista: return "vista";
        case Mode::lucid: return "lucid";
        case Mode::expert_vista: return "expert-vista";
        case Mode::expert_lucid: return "expert-lucid";
    }
    return "?";
}

inline std::optional<Mode> mode_from_name(std::string_view name) {
    if (name == "vista") return Mode::vista;
    if (name == "lucid") return Mode::lucid;
    if (name == "expert-vista") return Mode::expert_vista;
    if (name == "expert-lucid") return Mode::expert_lucid;
    return std::nullopt;
}

inline bool mode_is_expert(Mode m) { return m == Mode::expert_vista || m == Mode::expert_lucid; }
inline bool mode_invents_clusters(Mode m) { return m == Mode::lucid || m == Mode::expert_lucid; }

// Stratified k folds plus the per-fold train/tune/test split: the test fold,
// then of the remaining folds (taken cyclically) the first ~5/9 train the
// model structure and parameters and the rest tune.
struct FoldPlan {
    uint32_t k = 0;
    std::vector<std::vector<uint32_t>> folds;  // dataset indices
    struct Split {
        std::vector<uint32_t> train, tune, test;
    };
    std::vector<Split> splits;
};

inline FoldPlan make_folds(const Dataset& ds, uint32_t k, Rng& rng) {
    if (k < 3) throw DataError("need at least 3 folds for a train/tune/test split");
    std::vector<uint32_t> pos, neg;
    for (uint32_t i = 0; i < ds.size(); ++i) (ds.labels[i] ? pos : neg).push_back(i);
    if (pos.size() < k || neg.size() < k)
        throw DataError("stratification impossible: need at least " + std::to_string(k) +
                        " examples of each class, have " + std::to_string(pos.size()) + "+/" +
                        std::to_string(neg.size()) + "-");
    rng.shuffle(pos);
    rng.shuffle(neg);

    FoldPlan plan;
    plan.k = k;
    plan.folds.assign(k, {});
    for (size_t i = 0; i < pos.size(); ++i) plan.folds[i % k].push_back(pos[i]);
    for (size_t i = 0; i < neg.size(); ++i) plan.folds[i % k].push_back(neg[i]);

    uint32_t n_train = std::max<uint32_t>(1, static_cast<uint32_t>(std::lround((k - 1) * 5.0 / 9.0)));
    if (n_train > k - 2) n_train = k - 2;  // keep at least one tuning fold
    plan.splits.resize(k);
    for (uint32_t t = 0; t < k; ++t) {
        FoldPlan::Split& s = plan.splits[t];
        s.test = plan.folds[t];
        for (uint32_t j = 1; j < k; ++j) {
            const auto& fold = plan.folds[(t + j) % k];
            auto& dst = j <= n_train ? s.train : s.tune;
            dst.insert(dst.end(), fold.begin(), fold.end());
        }
    }
    return plan;
}

struct RunResult {
    std::vector<Feature> fs;
    std::vector<std::string> feature_texts;
    ClusterRegistry registry;
    TanModel model;        // trained on the training split over the final FS
    double tune_score = 0.0;
    double test_auc = 0.0;
    std::vector<TraceRecord> trace;
    double seconds = 0.0;
};

// One search run on one split. The fact base must already carry any expert
// hierarchy predicates; `cfg.invent_clusters` decides vista vs lucid.
inline RunResult run_fold(const FactBase& fb, const Dataset& ds, const FoldPlan::Split& split,
                          const SearchConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    SearchEngine engine(fb, make_split(ds, split.train), make_split(ds, split.tune), cfg);
    engine.run();

    RunResult out;
    out.fs = engine.state().fs;
    out.feature_texts = engine.state().fs_texts;
    out.registry = engine.state().registry;
    out.tune_score = engine.state().current_score;
    out.trace = engine.trace();
    out.model = engine.scorer().train_model();

    SplitView test = make_split(ds, split.test);
    ClusterFacts committed = out.registry.materialize();
    std::vector<double> scores(test.size());
    std::vector<uint8_t> row(out.fs.size());
    std::vector<BitColumn> cols;
    cols.reserve(out.fs.size());
    for (const Feature& f : out.fs) cols.push_back(feature_column(f, test, fb, committed));
    for (uint32_t r = 0; r < test.size(); ++r) {
        for (size_t j = 0; j < cols.size(); ++j) row[j] = cols[j].get(r) ? 1 : 0;
        scores[r] = predict(out.model, row);
    }
    out.test_auc = auc_pr(scores, test.labels).auc_pr;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// The outer demand-driven loop as a standalone entry point: run the search
// with cluster invention enabled and return the learned artifacts.
struct LucidRun {
    std::vector<Feature> fs;
    ClusterRegistry registry;
    TanModel model;
};

inline LucidRun lucid_run(const FactBase& fb, const SplitView& train, const SplitView& tune,
                          SearchConfig cfg) {
    cfg.invent_clusters = true;
    SearchEngine engine(fb, train, tune, cfg);
    engine.run();
    return {engine.state().fs, engine.state().registry, engine.scorer().train_model()};
}

struct ExperimentConfig {
    std::vector<Mode> modes;
    uint32_t k = 10;
    SearchConfig search;          // search.seed is the master seed
    std::string hierarchy_text;   // required by expert modes
    uint32_t jobs = 1;
};

struct FoldCell {
    double auc_pr = 0.0;
    uint32_t n_features = 0;
    uint32_t n_clusters = 0;
    double seconds = 0.0;
    std::vector<std::string> features;
    std::string clusters_text;
    std::string model_text;
    std::vector<TraceRecord> trace;
};

struct ExperimentReport {
    std::vector<Mode> modes;
    uint32_t k = 0;
    std::vector<std::vector<FoldCell>> cells;  // [mode][fold]

    double mean(size_t mode) const {
        double s = 0;
        for (const FoldCell& c : cells[mode]) s += c.auc_pr;
        return s / cells[mode].size();
    }
    double stdev(size_t mode) const {
        if (cells[mode].size() < 2) return 0.0;
        double m = mean(mode), s = 0;
        for (const FoldCell& c : cells[mode]) s += (c.auc_pr - m) * (c.auc_pr - m);
        return std::sqrt(s / (cells[mode].size() - 1));
    }
};

// Runs every requested mode over one shared fold plan. Every mode sees the
// same splits and the same per-fold RNG seed, so vista and lucid construct
// identical base candidate sets.
inline ExperimentReport compare_modes(const FactBase& fb, const Dataset& ds,
                                      const ExperimentConfig& cfg) {
    Rng fold_rng(derive_seed(cfg.search.seed, "folds"));
    FoldPlan plan = make_folds(ds, cfg.k, fold_rng);

    bool need_expert = false;
    for (Mode m : cfg.modes) need_expert |= mode_is_expert(m);
    FactBase expert_fb;
    if (need_expert) {
        if (cfg.hierarchy_text.empty())
            throw DataError("expert modes require a hierarchy file");
        expert_fb = inject_hierarchy(fb, parse_hierarchy(cfg.hierarchy_text));
    }

    ExperimentReport report;
    report.modes = cfg.modes;
    report.k = cfg.k;
    report.cells.assign(cfg.modes.size(), std::vector<FoldCell>(cfg.k));

    struct Task {
        size_t mode_idx;
        uint32_t fold;
    };
    std::vector<Task> tasks;
    for (size_t m = 0; m < cfg.modes.size(); ++m)
        for (uint32_t f = 0; f < cfg.k; ++f) tasks.push_back({m, f});

    auto run_task = [&](const Task& t) {
        Mode mode = cfg.modes[t.mode_idx];
        const FactBase& base = mode_is_expert(mode) ? expert_fb : fb;
        SearchConfig sc = cfg.search;
        sc.invent_clusters = mode_invents_clusters(mode);
        sc.seed = derive_seed(cfg.search.seed, "run", t.fold);
        RunResult r = run_fold(base, ds, plan.splits[t.fold], sc);
        FoldCell& cell = report.cells[t.mode_idx][t.fold];
        cell.auc_pr = r.test_auc;
        cell.n_features = static_cast<uint32_t>(r.fs.size());
        cell.n_clusters = static_cast<uint32_t>(r.registry.size());
        cell.seconds = r.seconds;
        cell.features = r.feature_texts;
        cell.clusters_text = print_clusters(base, r.registry);
        cell.model_text = model_report(r.model);
        cell.trace = std::move(r.trace);
    };

    uint32_t jobs = std::max<uint32_t>(1, cfg.jobs);
    if (jobs == 1) {
        for (const Task& t : tasks) run_task(t);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (uint32_t w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    run_task(tasks[i]);
                }
            });
        for (auto& th : pool) th.join();
    }
    return report;
}

}  // namespace lucid
