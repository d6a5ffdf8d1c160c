// Line-oriented fact-file grammar: `#type`, `#pred`, ground facts, and the
// separate +/- labels file. Printing is the inverse used by the round-trip
// tests and by every tool that persists a task.
#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

#include "lucid/relational.hpp"
#include "lucid/util.hpp"

namespace lucid {

namespace detail {

inline bool is_ident(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

inline bool is_symbol(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',' ||
            c == '%')
            return false;
    return true;
}

inline std::string_view strip_comment(std::string_view line) {
    size_t pos = line.find('%');
    if (pos != std::string_view::npos) line = line.substr(0, pos);
    return trim(line);
}

// Splits `pred(a,b,c)` into name and raw args; throws on malformed shape.
inline std::pair<std::string_view, std::vector<std::string_view>> split_call(std::string_view s,
                                                                             int lineno) {
    size_t open = s.find('(');
    if (open == std::string_view::npos || s.back() != ')')
        throw ParseError(lineno, "expected name(arg,...): '" + std::string(s) + "'");
    std::string_view name = trim(s.substr(0, open));
    std::string_view inner = s.substr(open + 1, s.size() - open - 2);
    std::vector<std::string_view> args;
    for (auto part : split(inner, ',')) args.push_back(trim(part));
    return {name, std::move(args)};
}

}  // namespace detail

// Parses type and predicate declarations plus ground facts into a frozen
// FactBase. Every error carries the offending line number.
inline FactBase parse_facts(std::string_view text) {
    FactBase fb;
    int lineno = 0;
    for (auto raw : split(text, '\n')) {
        ++lineno;
        std::string_view line = detail::strip_comment(raw);
        if (line.empty()) continue;

        if (starts_with(line, "#type")) {
            auto tokens = split(trim(line.substr(5)), ' ');
            std::vector<std::string_view> parts;
            for (auto t : tokens)
                if (!trim(t).empty()) parts.push_back(trim(t));
            if (parts.empty()) throw ParseError(lineno, "#type needs a name");
            if (!detail::is_ident(parts[0]))
                throw ParseError(lineno, "bad type name: '" + std::string(parts[0]) + "'");
            bool numeric = false, latent = false;
            for (size_t i = 1; i < parts.size(); ++i) {
                if (parts[i] == "numeric") numeric = true;
                else if (parts[i] == "latent") latent = true;
                else throw ParseError(lineno, "unknown type flag: '" + std::string(parts[i]) + "'");
            }
            try {
                fb.add_type(std::string(parts[0]), numeric, latent);
            } catch (const DataError& e) {
                throw ParseError(lineno, e.what());
            }
            continue;
        }

        if (starts_with(line, "#pred")) {
            std::string_view rest = trim(line.substr(5));
            bool target = false;
            if (rest.size() > 6 && rest.substr(rest.size() - 6) == "target" &&
                std::isspace(static_cast<unsigned char>(rest[rest.size() - 7]))) {
                target = true;
                rest = trim(rest.substr(0, rest.size() - 6));
            }
            auto [name, args] = detail::split_call(rest, lineno);
            if (!detail::is_ident(name))
                throw ParseError(lineno, "bad predicate name: '" + std::string(name) + "'");
            std::vector<TypeId> arg_types;
            for (auto a : args) {
                auto tid = fb.type_id(a);
                if (!tid) throw ParseError(lineno, "unknown type: '" + std::string(a) + "'");
                arg_types.push_back(*tid);
            }
            try {
                fb.add_pred(std::string(name), std::move(arg_types),
                            target ? PredRole::target : PredRole::evidence);
            } catch (const DataError& e) {
                throw ParseError(lineno, e.what());
            }
            continue;
        }

        // Ground fact: pred(c1,...,cn).
        if (line.back() != '.')
            throw ParseError(lineno, "fact must end with '.': '" + std::string(line) + "'");
        auto [name, args] = detail::split_call(trim(line.substr(0, line.size() - 1)), lineno);
        auto pid = fb.pred_id(name);
        if (!pid) throw ParseError(lineno, "unknown predicate: '" + std::string(name) + "'");
        const PredicateSig& sig = fb.pred(*pid);
        if (args.size() != sig.arg_types.size())
            throw ParseError(lineno, "arity mismatch for " + sig.name + ": got " +
                                         std::to_string(args.size()) + ", declared " +
                                         std::to_string(sig.arg_types.size()));
        std::vector<ConstIdx> ids;
        ids.reserve(args.size());
        for (size_t i = 0; i < args.size(); ++i) {
            if (!detail::is_symbol(args[i]))
                throw ParseError(lineno, "bad constant: '" + std::string(args[i]) + "'");
            try {
                ids.push_back(fb.intern_const(sig.arg_types[i], std::string(args[i])));
            } catch (const DataError& e) {
                throw ParseError(lineno, e.what());
            }
        }
        fb.add_atom(*pid, ids);
    }
    fb.freeze();
    return fb;
}

// Labels file: one `+ <example>` or `- <example>` per line. Example constants
// that never occur in facts are interned here so zero-fact examples exist.
inline Dataset parse_labels(std::string_view text, FactBase& fb) {
    Dataset ds;
    ds.example_type = fb.example_type();
    std::unordered_set<ConstIdx> seen;
    int lineno = 0;
    bool added = false;
    for (auto raw : split(text, '\n')) {
        ++lineno;
        std::string_view line = detail::strip_comment(raw);
        if (line.empty()) continue;
        if (line.size() < 2 || (line[0] != '+' && line[0] != '-'))
            throw ParseError(lineno, "label line must start with + or -");
        std::string_view sym = trim(line.substr(1));
        if (!detail::is_symbol(sym))
            throw ParseError(lineno, "bad example id: '" + std::string(sym) + "'");
        ConstIdx id;
        if (auto existing = fb.const_id(ds.example_type, sym)) {
            id = *existing;
        } else {
            id = fb.intern_const(ds.example_type, std::string(sym));
            added = true;
        }
        if (!seen.insert(id).second)
            throw ParseError(lineno, "duplicate example: '" + std::string(sym) + "'");
        ds.examples.push_back(id);
        ds.labels.push_back(line[0] == '+' ? 1 : 0);
    }
    if (added) fb.freeze();
    return ds;
}

struct Program {
    FactBase facts;
    Dataset dataset;
};

inline Program parse_program(std::string_view fact_text, std::string_view label_text = {}) {
    Program p;
    p.facts = parse_facts(fact_text);
    if (!label_text.empty()) p.dataset = parse_labels(label_text, p.facts);
    return p;
}

// --- printing (inverse of parse_facts / parse_labels) -----------------------

inline std::string print_facts(const FactBase& fb) {
    std::string out;
    for (TypeId t = 0; t < fb.n_types(); ++t) {
        const TypeDecl& d = fb.type(t);
        out += "#type " + d.name;
        if (d.numeric) out += " numeric";
        if (d.latent) out += " latent";
        out += "\n";
    }
    for (PredId p = 0; p < fb.n_preds(); ++p) {
        const PredicateSig& sig = fb.pred(p);
        out += "#pred " + sig.name + "(";
        for (size_t i = 0; i < sig.arg_types.size(); ++i) {
            if (i) out += ",";
            out += fb.type(sig.arg_types[i]).name;
        }
        out += ")";
        if (sig.role == PredRole::target) out += " target";
        out += "\n";
    }
    for (PredId p = 0; p < fb.n_preds(); ++p) {
        const PredicateSig& sig = fb.pred(p);
        for (uint32_t row = 0; row < fb.n_atoms(p); ++row) {
            auto args = fb.atom_args(p, row);
            out += sig.name + "(";
            for (uint32_t i = 0; i < args.size(); ++i) {
                if (i) out += ",";
                out += fb.const_symbol(sig.arg_types[i], args[i]);
            }
            out += ").\n";
        }
    }
    return out;
}

inline std::string print_labels(const FactBase& fb, const Dataset& ds) {
    std::string out;
    for (size_t i = 0; i < ds.examples.size(); ++i) {
        out += ds.labels[i] ? "+ " : "- ";
        out += fb.const_symbol(ds.example_type, ds.examples[i]);
        out += "\n";
    }
    return out;
}

}  // namespace lucid
