// Demand-driven cluster invention: rewrite a constant-bearing rule into a
// cluster-bearing one, collect candidate members from near-miss examples,
// and grow the cluster greedily while the retrained model score improves.
#pragma once

#include <map>
#include <set>
#include <vector>

#include "lucid/clusters.hpp"
#include "lucid/scoring.hpp"

namespace lucid {

struct NearMissCandidate {
    enum class Kind : uint8_t { cluster, constant };
    Kind kind = Kind::constant;
    ClusterId cluster = 0;
    ConstIdx constant = 0;
    uint32_t support = 0;  // near-miss examples covered after substitution
};

namespace detail {

inline std::vector<size_t> literals_with_const(const Feature& f, TypeId t, ConstIdx c) {
    std::vector<size_t> out;
    for (size_t i = 0; i < f.body.size(); ++i)
        for (const Term& term : f.body[i].args)
            if (term.is_const() && term.type == t && term.id == c) {
                out.push_back(i);
                break;
            }
    return out;
}

inline Feature substitute_const(const Feature& f, TypeId t, ConstIdx from, ConstIdx to) {
    Feature out = f;
    for (Literal& l : out.body)
        for (Term& term : l.args)
            if (term.is_const() && term.type == t && term.id == from) term.id = to;
    return out;
}

}  // namespace detail

// The rule's immediate predecessor: the body without the constant-carrying
// literals. Comparison literals whose variable is no longer bound by any
// remaining literal are dropped with them.
inline Feature immediate_predecessor(const Feature& f, TypeId t, ConstIdx c) {
    auto drop = detail::literals_with_const(f, t, c);
    if (drop.empty())
        throw ContractError("constant does not occur in the feature body");
    std::set<size_t> dropped(drop.begin(), drop.end());
    Feature pred;
    pred.head = f.head;
    std::set<VarId> bound{f.head.args[0].id};
    for (size_t i = 0; i < f.body.size(); ++i) {
        if (dropped.count(i) || f.body[i].kind == Literal::Kind::compare) continue;
        for (const Term& term : f.body[i].args)
            if (term.is_var()) bound.insert(term.id);
    }
    for (size_t i = 0; i < f.body.size(); ++i) {
        if (dropped.count(i)) continue;
        const Literal& l = f.body[i];
        if (l.kind == Literal::Kind::compare && !bound.count(l.args[0].id)) continue;
        pred.body.push_back(l);
    }
    return pred;
}

// Syntactic half of the rewrite: every occurrence of the constant becomes
// one fresh variable and the invented cluster literal is conjoined in front.
inline Feature rewrite_feature(const Feature& f, TypeId t, ConstIdx c, ClusterId new_cluster) {
    if (detail::literals_with_const(f, t, c).empty())
        throw ContractError("constant does not occur in the feature body");
    VarId fresh = num_vars(f);
    Feature out;
    out.head = f.head;
    out.body.reserve(f.body.size() + 1);
    out.body.push_back(Literal::cluster_member(new_cluster, Term::variable(t, fresh)));
    for (const Literal& l : f.body) {
        Literal nl = l;
        for (Term& term : nl.args)
            if (term.is_const() && term.type == t && term.id == c)
                term = Term::variable(t, fresh);
        out.body.push_back(std::move(nl));
    }
    return out;
}

struct NearMissResult {
    std::vector<NearMissCandidate> candidates;  // earlier clusters first, then ranked constants
    std::vector<ConstIdx> near_examples;        // covered by the predecessor but not the rule
};

// Candidates for growing a cluster that generalizes `c` in `f`: (i) every
// committed cluster over the same type, (ii) every constant that, substituted
// for `c`, covers at least one example the predecessor covers but f does not.
// Constants are ranked by that coverage count, ties lexicographic by symbol,
// and capped.
inline NearMissResult near_miss_candidates(const Feature& f, TypeId ctype, ConstIdx c,
                                           const ClusterRegistry& registry,
                                           const std::vector<ConstIdx>& train_examples,
                                           const FactBase& fb, const ClusterFacts& committed,
                                           uint32_t cap = 50) {
    if (!fb.type(ctype).latent)
        throw ContractError("constant type '" + fb.type(ctype).name + "' is not latent");
    auto occ = detail::literals_with_const(f, ctype, c);
    if (occ.empty()) throw ContractError("constant does not occur in the feature body");

    Feature pred = immediate_predecessor(f, ctype, c);

    NearMissResult out;
    detail::SatSolver pred_solver(pred, fb, committed);
    detail::SatSolver f_solver(f, fb, committed);
    for (ConstIdx e : train_examples)
        if (pred_solver.run(e) && !f_solver.run(e)) out.near_examples.push_back(e);

    for (ClusterId j : registry.of_type(ctype)) {
        NearMissCandidate cand;
        cand.kind = NearMissCandidate::Kind::cluster;
        cand.cluster = j;
        out.candidates.push_back(cand);
    }

    // Constant positions the replaced constant occupied, per predicate.
    std::set<std::pair<PredId, uint32_t>> positions;
    for (size_t i : occ) {
        const Literal& l = f.body[i];
        if (l.kind != Literal::Kind::relation) continue;
        for (uint32_t pos = 0; pos < l.args.size(); ++pos)
            if (l.args[pos].is_const() && l.args[pos].type == ctype && l.args[pos].id == c)
                positions.insert({l.pred, pos});
    }

    // Per near-miss example, the constants occurring at those positions; a
    // substitution can only cover an example whose facts mention it there.
    std::map<ConstIdx, std::vector<ConstIdx>> examples_of;  // candidate -> near examples
    const TypeId ex_type = fb.example_type();
    for (ConstIdx e : out.near_examples) {
        std::set<ConstIdx> local;
        for (auto [p, pos] : positions) {
            const PredicateSig& sig = fb.pred(p);
            uint32_t anchor = kNoId;
            for (uint32_t a = 0; a < sig.arg_types.size(); ++a)
                if (sig.arg_types[a] == ex_type) {
                    anchor = a;
                    break;
                }
            if (anchor == kNoId) continue;
            for (uint32_t row : fb.rows_with(p, anchor, e)) {
                ConstIdx v = fb.atom_args(p, row)[pos];
                if (v != c) local.insert(v);
            }
        }
        for (ConstIdx v : local) examples_of[v].push_back(e);
    }

    std::vector<NearMissCandidate> consts;
    for (auto& [cand, egs] : examples_of) {
        Feature sub = detail::substitute_const(f, ctype, c, cand);
        detail::SatSolver sub_solver(sub, fb, committed);
        uint32_t support = 0;
        for (ConstIdx e : egs)
            if (sub_solver.run(e)) ++support;
        if (support == 0) continue;
        NearMissCandidate nc;
        nc.kind = NearMissCandidate::Kind::constant;
        nc.constant = cand;
        nc.support = support;
        consts.push_back(nc);
    }
    std::sort(consts.begin(), consts.end(),
              [&fb, ctype](const NearMissCandidate& a, const NearMissCandidate& b) {
                  if (a.support != b.support) return a.support > b.support;
                  return fb.const_symbol(ctype, a.constant) < fb.const_symbol(ctype, b.constant);
              });
    if (consts.size() > cap) consts.resize(cap);
    out.candidates.insert(out.candidates.end(), consts.begin(), consts.end());
    return out;
}

struct ClusterGrowth {
    ClusterDef def;
    double score = 0.0;   // tune AUC-PR of FS extended with the rewritten rule
    FeatureColumns cols;  // columns of the rewritten rule under the final cluster
};

// Greedy growth: each pass tentatively extends the cluster with every
// remaining candidate, commits the single best strict improvement, and stops
// when no addition improves the retrained model's tune score.
inline ClusterGrowth learn_cluster(const Feature& f_prime, ClusterDef cluster,
                                   std::vector<NearMissCandidate> candidates, Scorer& scorer,
                                   const ClusterRegistry& registry, const ClusterFacts& committed) {
    // Locate the invented cluster literal; the growth only changes which
    // constants its variable may take, so coverage decomposes per constant.
    size_t cluster_lit = kNoId;
    for (size_t i = 0; i < f_prime.body.size(); ++i)
        if (f_prime.body[i].kind == Literal::Kind::cluster &&
            f_prime.body[i].cluster == cluster.id) {
            cluster_lit = i;
            break;
        }
    if (cluster_lit == kNoId)
        throw ContractError("rewritten feature does not reference the cluster under construction");
    const VarId cvar = f_prime.body[cluster_lit].args[0].id;
    const TypeId ctype = cluster.member_type;

    Feature general;  // f' without the cluster literal: the coverage upper bound
    general.head = f_prime.head;
    for (size_t i = 0; i < f_prime.body.size(); ++i)
        if (i != cluster_lit) general.body.push_back(f_prime.body[i]);
    const FeatureColumns upper = scorer.make_columns(general, committed);

    std::map<ConstIdx, FeatureColumns> contrib_cache;
    auto contribution = [&](ConstIdx c) -> const FeatureColumns& {
        auto it = contrib_cache.find(c);
        if (it != contrib_cache.end()) return it->second;
        Feature bound = general;
        for (Literal& l : bound.body)
            for (Term& t : l.args)
                if (t.is_var() && t.id == cvar) t = Term::constant(ctype, c);
        return contrib_cache.emplace(c, scorer.make_columns_within(bound, committed, upper))
            .first->second;
    };
    auto or_into = [](FeatureColumns& acc, const FeatureColumns& c) {
        acc.train.or_with(c.train);
        acc.tune.or_with(c.tune);
    };
    auto cluster_contribution = [&](ClusterId j, FeatureColumns& acc) {
        for (ConstIdx c : registry.extension(j)) or_into(acc, contribution(c));
    };

    FeatureColumns current{BitColumn(upper.train.size()), BitColumn(upper.tune.size())};
    for (ConstIdx c : registry.flatten(cluster)) or_into(current, contribution(c));
    double cur_score = scorer.score(&current).auc_pr;

    std::vector<bool> used(candidates.size(), false);
    for (;;) {
        size_t best = kNoId;
        double best_score = cur_score;
        FeatureColumns best_cols;
        for (size_t i = 0; i < candidates.size(); ++i) {
            if (used[i]) continue;
            FeatureColumns tentative = current;
            if (candidates[i].kind == NearMissCandidate::Kind::constant)
                or_into(tentative, contribution(candidates[i].constant));
            else
                cluster_contribution(candidates[i].cluster, tentative);
            if (tentative == current) continue;  // no coverage change, no score change
            double s = scorer.score(&tentative).auc_pr;
            if (s > best_score) {
                best_score = s;
                best = i;
                best_cols = std::move(tentative);
            }
        }
        if (best == kNoId) break;
        used[best] = true;
        if (candidates[best].kind == NearMissCandidate::Kind::constant)
            cluster.add_member(candidates[best].constant);
        else
            cluster.add_include(candidates[best].cluster);
        current = std::move(best_cols);
        cur_score = best_score;
    }

    return {std::move(cluster), cur_score, std::move(current)};
}

struct RewriteOutcome {
    Feature feature;
    ClusterDef cluster;   // learned, not yet committed to the registry
    double score = 0.0;   // tune AUC-PR of FS extended with `feature`
    FeatureColumns cols;  // columns of `feature` under the learned cluster
};

// Full rewrite of one constant in one rule: invent the next cluster id,
// replace the constant with a fresh variable plus the cluster literal, and
// learn the cluster membership from near-miss candidates.
inline RewriteOutcome rewrite_rule(const Feature& f, TypeId ctype, ConstIdx constant,
                                   const ClusterRegistry& registry, Scorer& scorer,
                                   const ClusterFacts& committed, uint32_t near_miss_cap = 50) {
    if (!scorer.facts().type(ctype).latent)
        throw ContractError("constant type '" + scorer.facts().type(ctype).name +
                            "' is not latent");
    Feature rewritten = rewrite_feature(f, ctype, constant, registry.next_id());
    NearMissResult nm = near_miss_candidates(f, ctype, constant, registry,
                                             scorer.train().examples, scorer.facts(), committed,
                                             near_miss_cap);
    ClusterDef def;
    def.id = registry.next_id();
    def.member_type = ctype;
    def.members = {constant};
    ClusterGrowth growth =
        learn_cluster(rewritten, std::move(def), std::move(nm.candidates), scorer, registry,
                      committed);
    return {std::move(rewritten), std::move(growth.def), growth.score, std::move(growth.cols)};
}

}  // namespace lucid
