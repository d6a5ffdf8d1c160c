// Clause satisfaction: does an example's data prove a feature's body?
// Backtracking join over the fact indexes, picking the cheapest unevaluated
// literal at each step. Pure; safe to call concurrently on a frozen base.
#pragma once

#include <algorithm>
#include <vector>

#include "lucid/relational.hpp"

namespace lucid {

class MalformedFeatureError : public ContractError {
public:
    explicit MalformedFeatureError(const std::string& msg) : ContractError(msg) {}
};

// Materialized extensions of invented cluster predicates, indexed by
// ClusterId. Extensions are sorted constant sets over the cluster's type.
struct ClusterFacts {
    std::vector<std::vector<ConstIdx>> extensions;

    bool contains(ClusterId c, ConstIdx x) const {
        const auto& ext = extensions.at(c);
        return std::binary_search(ext.begin(), ext.end(), x);
    }
    const std::vector<ConstIdx>& extension(ClusterId c) const { return extensions.at(c); }

    static const ClusterFacts& none() {
        static const ClusterFacts empty;
        return empty;
    }
};

namespace detail {

class SatSolver {
public:
    SatSolver(const Feature& f, const FactBase& fb, const ClusterFacts& clusters)
        : f_(f), fb_(fb), clusters_(clusters), binding_(num_vars(f), kNoId),
          done_(f.body.size(), false) {}

    bool run(ConstIdx example) {
        check_compare_vars_bound();
        binding_.assign(binding_.size(), kNoId);
        std::fill(done_.begin(), done_.end(), false);
        bind(f_.head.args[0].id, example);
        return solve(f_.body.size());
    }

private:
    static constexpr size_t kHuge = std::numeric_limits<size_t>::max();

    void check_compare_vars_bound() const {
        for (const Literal& l : f_.body) {
            if (l.kind != Literal::Kind::compare) continue;
            VarId v = l.args[0].id;
            if (v == f_.head.args[0].id) continue;
            bool bound = false;
            for (const Literal& b : f_.body) {
                if (b.kind == Literal::Kind::compare) continue;
                for (const Term& t : b.args)
                    if (t.is_var() && t.id == v) bound = true;
            }
            if (!bound)
                throw MalformedFeatureError("comparison variable " + var_name(v) +
                                            " is never bound by the body");
        }
    }

    void bind(VarId v, ConstIdx c) { binding_[v] = c; }

    ConstIdx value_of(const Term& t) const { return t.is_const() ? t.id : binding_[t.id]; }
    bool is_bound(const Term& t) const { return t.is_const() || binding_[t.id] != kNoId; }

    // Estimated number of candidate groundings for an unevaluated literal.
    size_t selectivity(const Literal& l) const {
        switch (l.kind) {
            case Literal::Kind::compare:
                return is_bound(l.args[0]) ? 0 : kHuge;
            case Literal::Kind::cluster:
                return is_bound(l.args[0]) ? 0 : clusters_.extension(l.cluster).size();
            case Literal::Kind::relation: {
                size_t best = fb_.n_atoms(l.pred);  // full scan fallback
                bool all_bound = true;
                for (uint32_t pos = 0; pos < l.args.size(); ++pos) {
                    if (is_bound(l.args[pos]))
                        best = std::min(best, fb_.rows_with(l.pred, pos, value_of(l.args[pos])).size());
                    else
                        all_bound = false;
                }
                return all_bound ? std::min<size_t>(best, 1) : best;
            }
        }
        return kHuge;
    }

    bool solve(size_t remaining) {
        if (remaining == 0) return true;
        size_t pick = kNoId, pick_cost = kHuge;
        for (size_t i = 0; i < f_.body.size(); ++i) {
            if (done_[i]) continue;
            size_t cost = selectivity(f_.body[i]);
            if (cost < pick_cost || pick == kNoId) {
                pick_cost = cost;
                pick = i;
                if (cost == 0) break;
            }
        }
        const Literal& l = f_.body[pick];
        done_[pick] = true;
        bool ok = match_literal(l, remaining - 1);
        done_[pick] = false;
        return ok;
    }

    bool match_literal(const Literal& l, size_t remaining) {
        switch (l.kind) {
            case Literal::Kind::compare: {
                const Term& t = l.args[0];
                double v = fb_.const_value(t.type, value_of(t));
                return cmp_eval(l.op, v, l.threshold) && solve(remaining);
            }
            case Literal::Kind::cluster: {
                const Term& t = l.args[0];
                if (is_bound(t))
                    return clusters_.contains(l.cluster, value_of(t)) && solve(remaining);
                for (ConstIdx c : clusters_.extension(l.cluster)) {
                    bind(t.id, c);
                    if (solve(remaining)) {
                        binding_[t.id] = kNoId;
                        return true;
                    }
                    binding_[t.id] = kNoId;
                }
                return false;
            }
            case Literal::Kind::relation:
                return match_relation(l, remaining);
        }
        return false;
    }

    bool match_relation(const Literal& l, size_t remaining) {
        // Drive iteration from the most selective bound position, else scan.
        size_t best_rows = fb_.n_atoms(l.pred);
        uint32_t best_pos = kNoId;
        for (uint32_t pos = 0; pos < l.args.size(); ++pos) {
            if (!is_bound(l.args[pos])) continue;
            size_t n = fb_.rows_with(l.pred, pos, value_of(l.args[pos])).size();
            if (n < best_rows || best_pos == kNoId) {
                best_rows = n;
                best_pos = pos;
            }
        }

        auto try_row = [&](uint32_t row) -> bool {
            auto args = fb_.atom_args(l.pred, row);
            std::vector<VarId> newly;
            bool ok = true;
            for (uint32_t pos = 0; pos < l.args.size() && ok; ++pos) {
                const Term& t = l.args[pos];
                if (t.is_const()) {
                    ok = t.id == args[pos];
                } else if (binding_[t.id] != kNoId) {
                    ok = binding_[t.id] == args[pos];
                } else {
                    bind(t.id, args[pos]);
                    newly.push_back(t.id);
                    // Repeated variable within the literal must self-agree,
                    // which the binding check above now enforces.
                }
            }
            if (ok && solve(remaining)) {
                for (VarId v : newly) binding_[v] = kNoId;
                return true;
            }
            for (VarId v : newly) binding_[v] = kNoId;
            return false;
        };

        if (best_pos != kNoId) {
            for (uint32_t row : fb_.rows_with(l.pred, best_pos, value_of(l.args[best_pos])))
                if (try_row(row)) return true;
        } else {
            for (uint32_t row = 0; row < fb_.n_atoms(l.pred); ++row)
                if (try_row(row)) return true;
        }
        return false;
    }

    const Feature& f_;
    const FactBase& fb_;
    const ClusterFacts& clusters_;
    std::vector<ConstIdx> binding_;
    std::vector<uint8_t> done_;
};

}  // namespace detail

// True iff some grounding of the body holds for this example.
inline bool satisfies(const Feature& f, ConstIdx example, const FactBase& fb,
                      const ClusterFacts& clusters = ClusterFacts::none()) {
    detail::SatSolver solver(f, fb, clusters);
    return solver.run(example);
}

struct Coverage {
    std::vector<ConstIdx> covered_pos;
    std::vector<ConstIdx> covered_neg;
};

inline Coverage coverage(const Feature& f, const Dataset& ds, const FactBase& fb,
                         const ClusterFacts& clusters = ClusterFacts::none()) {
    Coverage cov;
    detail::SatSolver solver(f, fb, clusters);
    for (size_t i = 0; i < ds.examples.size(); ++i) {
        if (!solver.run(ds.examples[i])) continue;
        (ds.labels[i] ? cov.covered_pos : cov.covered_neg).push_back(ds.examples[i]);
    }
    return cov;
}

}  // namespace lucid
