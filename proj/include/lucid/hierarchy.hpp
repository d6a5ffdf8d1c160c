// Expert hierarchy files: a forest of named nodes over latent-type
// constants. Injection adds one unary predicate per node whose facts hold
// for every constant at or below the node.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lucid/parse.hpp"
#include "lucid/relational.hpp"

namespace lucid {

struct HierarchyNode {
    std::string name;
    std::vector<std::string> constants;
    std::string parent;  // empty for roots
};

struct Hierarchy {
    std::vector<HierarchyNode> nodes;  // declaration order
    bool empty() const { return nodes.empty(); }
};

// Format: `node <name>: <const>,<const>,...` (list may be empty) and
// `parent <child> <parent>`.
inline Hierarchy parse_hierarchy(std::string_view text) {
    Hierarchy h;
    std::map<std::string, size_t> by_name;
    int lineno = 0;
    for (auto raw : split(text, '\n')) {
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty() || line[0] == '%') continue;
        if (starts_with(line, "node ")) {
            std::string_view rest = trim(line.substr(5));
            size_t colon = rest.find(':');
            if (colon == std::string_view::npos)
                throw ParseError(lineno, "node line needs 'node <name>: <members>'");
            std::string name(trim(rest.substr(0, colon)));
            if (!detail::is_ident(name)) throw ParseError(lineno, "bad node name: '" + name + "'");
            if (by_name.count(name)) throw ParseError(lineno, "duplicate node: '" + name + "'");
            HierarchyNode node;
            node.name = name;
            for (auto part : split(rest.substr(colon + 1), ',')) {
                auto sym = trim(part);
                if (sym.empty()) continue;
                if (!detail::is_symbol(sym))
                    throw ParseError(lineno, "bad constant: '" + std::string(sym) + "'");
                node.constants.emplace_back(sym);
            }
            by_name[name] = h.nodes.size();
            h.nodes.push_back(std::move(node));
            continue;
        }
        if (starts_with(line, "parent ")) {
            std::vector<std::string_view> parts;
            for (auto p : split(trim(line.substr(7)), ' '))
                if (!trim(p).empty()) parts.push_back(trim(p));
            if (parts.size() != 2) throw ParseError(lineno, "parent line needs '<child> <parent>'");
            auto child = by_name.find(std::string(parts[0]));
            auto parent = by_name.find(std::string(parts[1]));
            if (child == by_name.end())
                throw ParseError(lineno, "unknown node: '" + std::string(parts[0]) + "'");
            if (parent == by_name.end())
                throw ParseError(lineno, "unknown node: '" + std::string(parts[1]) + "'");
            if (!h.nodes[child->second].parent.empty())
                throw ParseError(lineno, "node '" + std::string(parts[0]) + "' already has a parent");
            h.nodes[child->second].parent = parts[1];
            continue;
        }
        throw ParseError(lineno, "expected 'node' or 'parent' line");
    }
    return h;
}

inline std::string print_hierarchy(const Hierarchy& h) {
    std::string out;
    for (const HierarchyNode& n : h.nodes) {
        out += "node " + n.name + ":";
        for (size_t i = 0; i < n.constants.size(); ++i)
            out += (i ? "," : " ") + n.constants[i];
        out += "\n";
    }
    for (const HierarchyNode& n : h.nodes)
        if (!n.parent.empty()) out += "parent " + n.name + " " + n.parent + "\n";
    return out;
}

// Returns a new fact base with one evidence predicate per hierarchy node and
// membership facts for every constant in the node's subtree.
inline FactBase inject_hierarchy(const FactBase& fb, const Hierarchy& h) {
    FactBase out = fb;
    if (h.empty()) {
        out.freeze();
        return out;
    }

    std::map<std::string, size_t> by_name;
    for (size_t i = 0; i < h.nodes.size(); ++i) by_name[h.nodes[i].name] = i;

    // Cycle check: walk each node's parent chain.
    for (size_t i = 0; i < h.nodes.size(); ++i) {
        std::set<size_t> seen{i};
        size_t cur = i;
        while (!h.nodes[cur].parent.empty()) {
            cur = by_name.at(h.nodes[cur].parent);
            if (!seen.insert(cur).second) throw DataError("cycle in hierarchy at node '" +
                                                          h.nodes[cur].name + "'");
        }
    }

    // Resolve constants: each must exist under exactly one latent type.
    auto resolve = [&fb](const std::string& sym) -> std::pair<TypeId, ConstIdx> {
        TypeId found = kNoId;
        ConstIdx idx = 0;
        for (TypeId t = 0; t < fb.n_types(); ++t) {
            if (!fb.type(t).latent) continue;
            if (auto c = fb.const_id(t, sym)) {
                if (found != kNoId)
                    throw DataError("hierarchy constant '" + sym + "' is ambiguous across latent types");
                found = t;
                idx = *c;
            }
        }
        if (found == kNoId) throw DataError("unknown hierarchy constant: '" + sym + "'");
        return {found, idx};
    };

    std::vector<std::set<ConstIdx>> closure(h.nodes.size());
    std::vector<TypeId> node_type(h.nodes.size(), kNoId);
    for (size_t i = 0; i < h.nodes.size(); ++i) {
        for (const std::string& sym : h.nodes[i].constants) {
            auto [t, c] = resolve(sym);
            if (node_type[i] == kNoId) node_type[i] = t;
            if (node_type[i] != t)
                throw DataError("node '" + h.nodes[i].name + "' mixes constant types");
            closure[i].insert(c);
        }
    }
    // Propagate members up the parent chains (transitive closure).
    for (size_t i = 0; i < h.nodes.size(); ++i) {
        size_t cur = i;
        while (!h.nodes[cur].parent.empty()) {
            cur = by_name.at(h.nodes[cur].parent);
            if (node_type[cur] == kNoId) node_type[cur] = node_type[i];
            if (node_type[i] != kNoId && node_type[cur] != node_type[i])
                throw DataError("node '" + h.nodes[cur].name + "' mixes constant types");
            closure[cur].insert(closure[i].begin(), closure[i].end());
        }
    }

    for (size_t i = 0; i < h.nodes.size(); ++i) {
        if (node_type[i] == kNoId)
            throw DataError("cannot infer a constant type for node '" + h.nodes[i].name + "'");
        PredId p = out.add_pred(h.nodes[i].name, {node_type[i]}, PredRole::evidence);
        for (ConstIdx c : closure[i]) {
            ConstIdx args[1] = {c};
            out.add_atom(p, args);
        }
    }
    out.freeze();
    return out;
}

}  // namespace lucid
