// Invented cluster predicates: member constants plus inclusion of earlier
// clusters (a DAG by construction, since a cluster may only include strictly
// earlier ones). Extensions are materialized as unary fact sets.
#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "lucid/relational.hpp"
#include "lucid/satisfy.hpp"
#include "lucid/util.hpp"

namespace lucid {

struct ClusterDef {
    ClusterId id = 0;  // creation order; printed 1-based as clusterN
    TypeId member_type = 0;
    std::vector<ConstIdx> members;    // sorted, unique
    std::vector<ClusterId> includes;  // strictly earlier ids, sorted

    // Provenance: which feature and search iteration created this cluster.
    uint32_t created_iteration = 0;
    std::string created_for;

    void add_member(ConstIdx c) {
        auto it = std::lower_bound(members.begin(), members.end(), c);
        if (it == members.end() || *it != c) members.insert(it, c);
    }
    void add_include(ClusterId j) {
        auto it = std::lower_bound(includes.begin(), includes.end(), j);
        if (it == includes.end() || *it != j) includes.insert(it, j);
    }
};

class ClusterRegistry {
public:
    size_t size() const { return defs_.size(); }
    bool empty() const { return defs_.empty(); }
    const ClusterDef& def(ClusterId id) const { return defs_.at(id); }
    const std::vector<ClusterDef>& defs() const { return defs_; }

    ClusterId next_id() const { return static_cast<ClusterId>(defs_.size()); }

    ClusterId commit(ClusterDef d) {
        if (d.id != defs_.size())
            throw ContractError("cluster id " + std::to_string(d.id) +
                                " does not match registry position " + std::to_string(defs_.size()));
        for (ClusterId j : d.includes)
            if (j >= d.id) throw ContractError("cluster may only include strictly earlier clusters");
        extensions_.push_back(flatten(d));
        defs_.push_back(std::move(d));
        return defs_.back().id;
    }

    // Transitive extension: members plus everything in included clusters.
    const std::vector<ConstIdx>& extension(ClusterId id) const { return extensions_.at(id); }

    // Flattened extension of a not-yet-committed definition against this
    // registry's committed clusters.
    std::vector<ConstIdx> flatten(const ClusterDef& d) const {
        std::set<ConstIdx> all(d.members.begin(), d.members.end());
        for (ClusterId j : d.includes) {
            const auto& ext = extensions_.at(j);
            all.insert(ext.begin(), ext.end());
        }
        return {all.begin(), all.end()};
    }

    // One unary fact per constant in each cluster's transitive extension.
    ClusterFacts materialize() const {
        ClusterFacts out;
        out.extensions = extensions_;
        return out;
    }

    // Committed extensions plus one tentative definition at the next id.
    ClusterFacts materialize_with(const ClusterDef& tentative) const {
        ClusterFacts out;
        out.extensions = extensions_;
        out.extensions.push_back(flatten(tentative));
        return out;
    }

    std::vector<ClusterId> of_type(TypeId t) const {
        std::vector<ClusterId> out;
        for (const ClusterDef& d : defs_)
            if (d.member_type == t) out.push_back(d.id);
        return out;
    }

private:
    std::vector<ClusterDef> defs_;
    std::vector<std::vector<ConstIdx>> extensions_;
};

// --- persistence -------------------------------------------------------------

// Clusters persist in the clause surface syntax: membership as unary facts,
// inclusion as `clusterJ(x) :- clusterI(x).`, provenance as comments.
inline std::string print_clusters(const FactBase& fb, const ClusterRegistry& reg) {
    std::string out;
    if (reg.empty()) {
        out += "% no invented clusters\n";
        return out;
    }
    for (const ClusterDef& d : reg.defs()) {
        out += "% " + cluster_pred_name(d.id) + " over " + fb.type(d.member_type).name +
               ", invented at iteration " + std::to_string(d.created_iteration);
        if (!d.created_for.empty()) out += " for: " + d.created_for;
        out += "\n";
        for (ConstIdx c : d.members)
            out += cluster_pred_name(d.id) + "(" + fb.const_symbol(d.member_type, c) + ").\n";
        for (ClusterId j : d.includes)
            out += cluster_pred_name(d.id) + "(x) :- " + cluster_pred_name(j) + "(x).\n";
    }
    return out;
}

namespace detail {

inline bool parse_cluster_name(std::string_view name, ClusterId& out) {
    if (!starts_with(name, "cluster")) return false;
    uint64_t n = 0;
    if (!parse_u64(name.substr(7), n) || n == 0) return false;
    out = static_cast<ClusterId>(n - 1);
    return true;
}

}  // namespace detail

// Reads the cluster surface syntax back. Member types are inferred from the
// latent type that declares each constant symbol.
inline ClusterRegistry parse_clusters(std::string_view text, const FactBase& fb) {
    struct Raw {
        std::vector<std::string> members;
        std::vector<ClusterId> includes;
        uint32_t iteration = 0;
        std::string created_for;
        bool present = false;
    };
    std::vector<Raw> raw;
    auto at = [&raw](ClusterId id) -> Raw& {
        if (raw.size() <= id) raw.resize(id + 1);
        raw[id].present = true;
        return raw[id];
    };

    int lineno = 0;
    for (auto raw_line : split(text, '\n')) {
        ++lineno;
        std::string_view line = trim(raw_line);
        if (line.empty() || line[0] == '%') continue;
        if (line.back() != '.') throw ParseError(lineno, "cluster line must end with '.'");
        line = trim(line.substr(0, line.size() - 1));

        size_t sep = line.find(":-");
        if (sep != std::string_view::npos) {
            auto [hname, hargs] = detail::split_call(trim(line.substr(0, sep)), lineno);
            auto [bname, bargs] = detail::split_call(trim(line.substr(sep + 2)), lineno);
            ClusterId head, body;
            if (!detail::parse_cluster_name(hname, head) || !detail::parse_cluster_name(bname, body))
                throw ParseError(lineno, "inclusion must relate two clusterN predicates");
            if (hargs.size() != 1 || bargs.size() != 1 || hargs[0] != bargs[0])
                throw ParseError(lineno, "inclusion must share one variable");
            if (body >= head) throw ParseError(lineno, "cluster may only include earlier clusters");
            at(head).includes.push_back(body);
            continue;
        }
        auto [name, args] = detail::split_call(line, lineno);
        ClusterId id;
        if (!detail::parse_cluster_name(name, id))
            throw ParseError(lineno, "expected clusterN membership fact");
        if (args.size() != 1) throw ParseError(lineno, "cluster predicates are unary");
        at(id).members.emplace_back(args[0]);
    }

    ClusterRegistry reg;
    for (ClusterId id = 0; id < raw.size(); ++id) {
        if (!raw[id].present)
            throw ParseError(0, "cluster " + cluster_pred_name(id) + " referenced but never defined");
        ClusterDef d;
        d.id = id;
        TypeId inferred = kNoId;
        for (const std::string& sym : raw[id].members) {
            TypeId found = kNoId;
            for (TypeId t = 0; t < fb.n_types(); ++t) {
                if (!fb.type(t).latent) continue;
                if (fb.const_id(t, sym)) {
                    if (found != kNoId)
                        throw ParseError(0, "constant '" + sym + "' is ambiguous across latent types");
                    found = t;
                }
            }
            if (found == kNoId)
                throw ParseError(0, "unknown cluster member constant: '" + sym + "'");
            if (inferred == kNoId) inferred = found;
            if (inferred != found)
                throw ParseError(0, "cluster " + cluster_pred_name(id) + " mixes member types");
            d.add_member(*fb.const_id(found, sym));
        }
        for (ClusterId j : raw[id].includes) {
            if (inferred == kNoId) inferred = reg.def(j).member_type;
            if (reg.def(j).member_type != inferred)
                throw ParseError(0, "cluster " + cluster_pred_name(id) + " includes a different type");
            d.add_include(j);
        }
        if (inferred == kNoId)
            throw ParseError(0, "cluster " + cluster_pred_name(id) + " is empty");
        d.member_type = inferred;
        reg.commit(std::move(d));
    }
    return reg;
}

}  // namespace lucid
