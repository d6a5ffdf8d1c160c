// Bottom-clause saturation and general-to-specific refinement. The bottom
// clause variablizes every fact reachable from one seed example within the
// depth limit; shared constants share variables, latent-type constants are
// additionally kept in place, and numeric variables get quantile-threshold
// comparison literals that hold for the seed.
#pragma once

#include <deque>
#include <map>
#include <set>
#include <vector>

#include "lucid/relational.hpp"

namespace lucid {

// Per-type comparison thresholds, derived from the values observed in facts
// about a given example set (training examples only, to avoid leakage).
struct ComparisonThresholds {
    std::vector<std::vector<double>> by_type;

    const std::vector<double>& for_type(TypeId t) const {
        static const std::vector<double> empty;
        return t < by_type.size() ? by_type[t] : empty;
    }
};

// Quantile cut points (default deciles) of the numeric values occurring in
// facts anchored at the given examples.
inline ComparisonThresholds compute_thresholds(const FactBase& fb,
                                               const std::vector<ConstIdx>& examples,
                                               uint32_t quantiles = 10) {
    TypeId ex_type = fb.example_type();
    std::vector<std::set<double>> values(fb.n_types());
    for (PredId p = 0; p < fb.n_preds(); ++p) {
        if (p == fb.target_pred()) continue;
        const PredicateSig& sig = fb.pred(p);
        uint32_t anchor = kNoId;
        for (uint32_t pos = 0; pos < sig.arg_types.size(); ++pos)
            if (sig.arg_types[pos] == ex_type) {
                anchor = pos;
                break;
            }
        if (anchor == kNoId) continue;
        for (ConstIdx e : examples) {
            for (uint32_t row : fb.rows_with(p, anchor, e)) {
                auto args = fb.atom_args(p, row);
                for (uint32_t pos = 0; pos < args.size(); ++pos)
                    if (fb.type(sig.arg_types[pos]).numeric)
                        values[sig.arg_types[pos]].insert(fb.const_value(sig.arg_types[pos], args[pos]));
            }
        }
    }
    ComparisonThresholds out;
    out.by_type.resize(fb.n_types());
    for (TypeId t = 0; t < fb.n_types(); ++t) {
        if (values[t].size() < 2) continue;
        std::vector<double> sorted(values[t].begin(), values[t].end());
        std::set<double> cuts;
        for (uint32_t q = 1; q < quantiles; ++q) {
            size_t idx = q * sorted.size() / quantiles;
            if (idx > 0 && idx < sorted.size()) cuts.insert(sorted[idx]);
        }
        out.by_type[t].assign(cuts.begin(), cuts.end());
    }
    return out;
}

struct BottomConfig {
    uint32_t depth_limit = 2;
    uint32_t width_limit = 5000;  // max candidate body literals
    const ComparisonThresholds* thresholds = nullptr;
};

struct BottomLiteral {
    Literal lit;
    uint32_t depth = 0;
};

// Most-specific clause derivable from one seed example. `var_seed_value`
// maps each variable back to the seed constant it generalizes.
struct BottomClause {
    Literal head;
    std::vector<BottomLiteral> body;
    std::vector<ConstIdx> var_seed_value;
    std::vector<TypeId> var_type;

    size_t n_vars() const { return var_seed_value.size(); }
};

inline BottomClause saturate(ConstIdx seed, const FactBase& fb, const BottomConfig& config) {
    BottomClause bottom;
    const PredId target = fb.target_pred();
    const TypeId ex_type = fb.example_type();

    auto new_var = [&bottom](TypeId t, ConstIdx c) -> VarId {
        bottom.var_seed_value.push_back(c);
        bottom.var_type.push_back(t);
        return static_cast<VarId>(bottom.var_seed_value.size() - 1);
    };

    std::map<std::pair<TypeId, ConstIdx>, VarId> var_of;
    var_of[{ex_type, seed}] = new_var(ex_type, seed);
    bottom.head = Literal::relation(target, {Term::variable(ex_type, 0)});

    std::deque<std::pair<TypeId, ConstIdx>> frontier{{ex_type, seed}};
    std::vector<uint32_t> const_depth{0};  // parallel to vars
    std::set<std::pair<PredId, uint32_t>> seen_atoms;
    bool full = false;

    auto emit = [&](Literal lit, uint32_t depth) {
        if (bottom.body.size() >= config.width_limit) {
            full = true;
            return;
        }
        bottom.body.push_back({std::move(lit), depth});
    };

    while (!frontier.empty() && !full) {
        auto [ctype, cval] = frontier.front();
        frontier.pop_front();
        uint32_t cdepth = const_depth[var_of[{ctype, cval}]];
        if (cdepth >= config.depth_limit) continue;

        for (PredId p = 0; p < fb.n_preds() && !full; ++p) {
            if (p == target) continue;
            const PredicateSig& sig = fb.pred(p);
            for (uint32_t pos = 0; pos < sig.arg_types.size() && !full; ++pos) {
                if (sig.arg_types[pos] != ctype) continue;
                for (uint32_t row : fb.rows_with(p, pos, cval)) {
                    if (full) break;
                    if (!seen_atoms.insert({p, row}).second) continue;
                    auto args = fb.atom_args(p, row);
                    uint32_t depth = cdepth + 1;

                    std::vector<Term> var_args(args.size());
                    std::vector<VarId> fresh;
                    for (uint32_t i = 0; i < args.size(); ++i) {
                        TypeId at = sig.arg_types[i];
                        auto key = std::make_pair(at, args[i]);
                        auto it = var_of.find(key);
                        if (it == var_of.end()) {
                            VarId v = new_var(at, args[i]);
                            const_depth.push_back(depth);
                            it = var_of.emplace(key, v).first;
                            frontier.push_back(key);
                            fresh.push_back(v);
                        }
                        var_args[i] = Term::variable(at, it->second);
                    }
                    emit(Literal::relation(p, var_args), depth);

                    // Latent-type constants are also retained in place, one
                    // variant per latent position, provided a variable is left
                    // to join on.
                    for (uint32_t i = 0; i < args.size() && !full; ++i) {
                        if (!fb.type(sig.arg_types[i]).latent) continue;
                        if (args.size() < 2) continue;
                        std::vector<Term> mixed = var_args;
                        mixed[i] = Term::constant(sig.arg_types[i], args[i]);
                        emit(Literal::relation(p, std::move(mixed)), depth);
                    }

                    // Seed-true comparison candidates for fresh numeric vars.
                    if (config.thresholds) {
                        for (VarId v : fresh) {
                            TypeId vt = bottom.var_type[v];
                            if (!fb.type(vt).numeric) continue;
                            double seed_val = fb.const_value(vt, bottom.var_seed_value[v]);
                            for (double t : config.thresholds->for_type(vt)) {
                                if (full) break;
                                CmpOp op = seed_val < t ? CmpOp::lt : CmpOp::ge;
                                emit(Literal::compare(Term::variable(vt, v), op, t), depth);
                            }
                        }
                    }
                }
            }
        }
    }
    return bottom;
}

// One child per bottom literal that is absent from the body and shares at
// least one variable with the body or head. Each child appends one literal,
// so child coverage is a subset of the parent's.
inline std::vector<Feature> refine(const Feature& f, const BottomClause& bottom) {
    std::vector<bool> have_var(bottom.n_vars(), false);
    have_var[f.head.args[0].id] = true;
    for (const Literal& l : f.body)
        for (const Term& t : l.args)
            if (t.is_var()) have_var[t.id] = true;

    std::vector<Feature> children;
    for (const BottomLiteral& bl : bottom.body) {
        bool present = false;
        for (const Literal& l : f.body)
            if (l == bl.lit) {
                present = true;
                break;
            }
        if (present) continue;
        bool joins = false;
        for (const Term& t : bl.lit.args)
            if (t.is_var() && have_var[t.id]) {
                joins = true;
                break;
            }
        if (!joins) continue;
        Feature child = f;
        child.body.push_back(bl.lit);
        children.push_back(std::move(child));
    }
    return children;
}

}  // namespace lucid
