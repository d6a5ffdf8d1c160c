// Typed non-recursive Datalog-lite substrate: type/predicate declarations,
// interned constants, ground atoms with positional indexes, clause features.
#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lucid/util.hpp"

namespace lucid {

using TypeId = uint32_t;
using PredId = uint32_t;
using ConstIdx = uint32_t;  // index into the per-type constant table
using VarId = uint32_t;
using ClusterId = uint32_t;

constexpr uint32_t kNoId = std::numeric_limits<uint32_t>::max();

struct TypeDecl {
    std::string name;
    bool numeric = false;  // ordered-numeric vs categorical
    bool latent = false;   // eligible for invented clusters
    bool operator==(const TypeDecl&) const = default;
};

enum class PredRole : uint8_t { evidence, target, cluster };

struct PredicateSig {
    std::string name;
    std::vector<TypeId> arg_types;
    PredRole role = PredRole::evidence;
    bool operator==(const PredicateSig&) const = default;
};

struct Term {
    enum class Kind : uint8_t { constant, variable };
    Kind kind = Kind::variable;
    TypeId type = 0;
    uint32_t id = 0;  // ConstIdx or VarId

    static Term constant(TypeId t, ConstIdx c) { return {Kind::constant, t, c}; }
    static Term variable(TypeId t, VarId v) { return {Kind::variable, t, v}; }
    bool is_const() const { return kind == Kind::constant; }
    bool is_var() const { return kind == Kind::variable; }
    bool operator==(const Term&) const = default;
};

enum class CmpOp : uint8_t { lt, le, gt, ge, eq };

inline const char* cmp_op_text(CmpOp op) {
    switch (op) {
        case CmpOp::lt: return "<";
        case CmpOp::le: return "<=";
        case CmpOp::gt: return ">";
        case CmpOp::ge: return ">=";
        case CmpOp::eq: return "=";
    }
    return "?";
}

inline bool cmp_eval(CmpOp op, double v, double threshold) {
    switch (op) {
        case CmpOp::lt: return v < threshold;
        case CmpOp::le: return v <= threshold;
        case CmpOp::gt: return v > threshold;
        case CmpOp::ge: return v >= threshold;
        case CmpOp::eq: return v == threshold;
    }
    return false;
}

// One body element: a relational atom, an invented-cluster membership atom,
// or a numeric comparison on a bound variable. Comparison literals store the
// operand in args[0].
struct Literal {
    enum class Kind : uint8_t { relation, cluster, compare };
    Kind kind = Kind::relation;
    PredId pred = 0;        // relation only
    ClusterId cluster = 0;  // cluster only
    std::vector<Term> args;
    CmpOp op = CmpOp::lt;     // compare only
    double threshold = 0.0;   // compare only

    static Literal relation(PredId p, std::vector<Term> a) {
        Literal l;
        l.kind = Kind::relation;
        l.pred = p;
        l.args = std::move(a);
        return l;
    }
    static Literal cluster_member(ClusterId c, Term arg) {
        Literal l;
        l.kind = Kind::cluster;
        l.cluster = c;
        l.args = {arg};
        return l;
    }
    static Literal compare(Term var, CmpOp op, double threshold) {
        Literal l;
        l.kind = Kind::compare;
        l.args = {var};
        l.op = op;
        l.threshold = threshold;
        return l;
    }
    bool operator==(const Literal&) const = default;
};

// A definite clause used as a binary feature: body literals and a head over
// the target predicate. Variable 0 is the example variable by convention.
struct Feature {
    std::vector<Literal> body;
    Literal head;
    uint64_t id = 0;

    VarId head_var() const { return head.args.at(0).id; }
    bool operator==(const Feature& o) const { return body == o.body && head == o.head; }
};

inline uint32_t num_vars(const Feature& f) {
    uint32_t n = 0;
    auto visit = [&n](const Literal& l) {
        for (const Term& t : l.args)
            if (t.is_var()) n = std::max(n, t.id + 1);
    };
    visit(f.head);
    for (const Literal& l : f.body) visit(l);
    return n;
}

// Labeled example set over constants of the target's example type.
struct Dataset {
    TypeId example_type = 0;
    std::vector<ConstIdx> examples;
    std::vector<uint8_t> labels;  // 1 = positive

    size_t size() const { return examples.size(); }
    size_t count_positive() const {
        size_t n = 0;
        for (uint8_t l : labels) n += l;
        return n;
    }
    std::vector<ConstIdx> positives() const {
        std::vector<ConstIdx> out;
        for (size_t i = 0; i < examples.size(); ++i)
            if (labels[i]) out.push_back(examples[i]);
        return out;
    }
};

// Immutable-after-freeze store of typed ground atoms with per-position
// constant indexes. Queries are pure and safe to run concurrently once
// frozen.
class FactBase {
public:
    struct PredStore {
        uint32_t arity = 0;
        std::vector<ConstIdx> flat;  // row-major, arity entries per atom
        size_t count() const { return arity == 0 ? 0 : flat.size() / arity; }
    };

    // --- schema -----------------------------------------------------------

    TypeId add_type(const std::string& name, bool numeric, bool latent) {
        if (type_by_name_.count(name)) throw DataError("duplicate type: " + name);
        TypeId id = static_cast<TypeId>(types_.size());
        types_.push_back({name, numeric, latent});
        consts_.emplace_back();
        type_by_name_[name] = id;
        return id;
    }

    PredId add_pred(const std::string& name, std::vector<TypeId> arg_types, PredRole role) {
        if (pred_by_name_.count(name)) throw DataError("duplicate predicate: " + name);
        if (arg_types.empty()) throw DataError("predicate needs at least one argument: " + name);
        if (role == PredRole::target) {
            if (target_ != kNoId) throw DataError("second target predicate: " + name);
            target_ = static_cast<PredId>(preds_.size());
        }
        PredId id = static_cast<PredId>(preds_.size());
        preds_.push_back({name, std::move(arg_types), role});
        stores_.push_back(PredStore{static_cast<uint32_t>(preds_.back().arg_types.size()), {}});
        pred_by_name_[name] = id;
        frozen_ = false;
        return id;
    }

    std::optional<TypeId> type_id(std::string_view name) const {
        auto it = type_by_name_.find(std::string(name));
        if (it == type_by_name_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<PredId> pred_id(std::string_view name) const {
        auto it = pred_by_name_.find(std::string(name));
        if (it == pred_by_name_.end()) return std::nullopt;
        return it->second;
    }

    size_t n_types() const { return types_.size(); }
    size_t n_preds() const { return preds_.size(); }
    const TypeDecl& type(TypeId t) const { return types_[t]; }
    const PredicateSig& pred(PredId p) const { return preds_[p]; }
    const std::vector<TypeDecl>& types() const { return types_; }
    const std::vector<PredicateSig>& preds() const { return preds_; }

    PredId target_pred() const {
        if (target_ == kNoId) throw DataError("no target predicate declared");
        return target_;
    }
    bool has_target() const { return target_ != kNoId; }
    TypeId example_type() const { return preds_[target_pred()].arg_types[0]; }

    // --- constants ----------------------------------------------------------

    ConstIdx intern_const(TypeId t, const std::string& symbol) {
        ConstTable& tab = consts_[t];
        auto it = tab.by_symbol.find(symbol);
        if (it != tab.by_symbol.end()) return it->second;
        double value = std::numeric_limits<double>::quiet_NaN();
        if (types_[t].numeric && !parse_double(symbol, value))
            throw DataError("constant '" + symbol + "' is not numeric (type " + types_[t].name + ")");
        ConstIdx id = static_cast<ConstIdx>(tab.symbols.size());
        tab.symbols.push_back(symbol);
        tab.values.push_back(value);
        tab.by_symbol[symbol] = id;
        return id;
    }

    std::optional<ConstIdx> const_id(TypeId t, std::string_view symbol) const {
        const ConstTable& tab = consts_[t];
        auto it = tab.by_symbol.find(std::string(symbol));
        if (it == tab.by_symbol.end()) return std::nullopt;
        return it->second;
    }

    size_t n_consts(TypeId t) const { return consts_[t].symbols.size(); }
    const std::string& const_symbol(TypeId t, ConstIdx c) const { return consts_[t].symbols[c]; }
    double const_value(TypeId t, ConstIdx c) const { return consts_[t].values[c]; }

    // --- atoms --------------------------------------------------------------

    void add_atom(PredId p, std::span<const ConstIdx> args) {
        PredStore& st = stores_[p];
        assert(args.size() == st.arity);
        st.flat.insert(st.flat.end(), args.begin(), args.end());
        frozen_ = false;
    }

    size_t n_atoms(PredId p) const { return stores_[p].count(); }
    size_t total_atoms() const {
        size_t n = 0;
        for (const auto& st : stores_) n += st.count();
        return n;
    }
    std::span<const ConstIdx> atom_args(PredId p, uint32_t row) const {
        const PredStore& st = stores_[p];
        return {st.flat.data() + static_cast<size_t>(row) * st.arity, st.arity};
    }
    const PredStore& store(PredId p) const { return stores_[p]; }

    // Builds the (predicate, position, constant) -> rows indexes. Must be
    // called after the last mutation and before any indexed query.
    void freeze() {
        index_.assign(preds_.size(), {});
        for (PredId p = 0; p < preds_.size(); ++p) {
            const PredStore& st = stores_[p];
            index_[p].assign(st.arity, {});
            for (uint32_t row = 0; row < st.count(); ++row) {
                auto args = atom_args(p, row);
                for (uint32_t pos = 0; pos < st.arity; ++pos)
                    index_[p][pos][args[pos]].push_back(row);
            }
        }
        frozen_ = true;
    }
    bool frozen() const { return frozen_; }

    // Rows of predicate p whose argument at `pos` equals `c`.
    const std::vector<uint32_t>& rows_with(PredId p, uint32_t pos, ConstIdx c) const {
        assert(frozen_);
        if (access_probe_ && preds_[p].arg_types[pos] == probe_type_) access_probe_(c);
        const auto& m = index_[p][pos];
        auto it = m.find(c);
        if (it == m.end()) return empty_rows_;
        return it->second;
    }

    bool has_atom(PredId p, std::span<const ConstIdx> args) const {
        const auto& rows = rows_with(p, 0, args[0]);
        for (uint32_t row : rows) {
            auto a = atom_args(p, row);
            if (std::equal(a.begin(), a.end(), args.begin())) return true;
        }
        return false;
    }

    // Test instrumentation: invoked with the constant id on every indexed
    // lookup keyed by a constant of `probe_type` (normally the example type).
    void set_access_probe(TypeId probe_type, std::function<void(ConstIdx)> probe) const {
        probe_type_ = probe_type;
        access_probe_ = std::move(probe);
    }
    void clear_access_probe() const { access_probe_ = nullptr; }

    // Content equality: same declarations and the same atoms per predicate,
    // independent of constant intern order.
    bool operator==(const FactBase& o) const {
        if (types_ != o.types_ || preds_ != o.preds_) return false;
        for (PredId p = 0; p < preds_.size(); ++p)
            if (atoms_by_symbol(p) != o.atoms_by_symbol(p)) return false;
        return true;
    }

    std::vector<std::vector<std::string>> atoms_by_symbol(PredId p) const {
        std::vector<std::vector<std::string>> out;
        out.reserve(n_atoms(p));
        for (uint32_t row = 0; row < n_atoms(p); ++row) {
            auto args = atom_args(p, row);
            std::vector<std::string> sym;
            sym.reserve(args.size());
            for (uint32_t pos = 0; pos < args.size(); ++pos)
                sym.push_back(const_symbol(preds_[p].arg_types[pos], args[pos]));
            out.push_back(std::move(sym));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct ConstTable {
        std::vector<std::string> symbols;
        std::vector<double> values;
        std::unordered_map<std::string, ConstIdx> by_symbol;
    };

    std::vector<TypeDecl> types_;
    std::vector<PredicateSig> preds_;
    std::vector<ConstTable> consts_;
    std::vector<PredStore> stores_;
    std::unordered_map<std::string, TypeId> type_by_name_;
    std::unordered_map<std::string, PredId> pred_by_name_;
    PredId target_ = kNoId;
    bool frozen_ = false;

    std::vector<std::vector<std::unordered_map<ConstIdx, std::vector<uint32_t>>>> index_;
    inline static const std::vector<uint32_t> empty_rows_{};

    mutable TypeId probe_type_ = kNoId;
    mutable std::function<void(ConstIdx)> access_probe_;
};

// --- printing ---------------------------------------------------------------

inline std::string var_name(VarId v) {
    if (v < 26) return std::string(1, static_cast<char>('A' + v));
    return "V" + std::to_string(v);
}

inline std::string cluster_pred_name(ClusterId c) { return "cluster" + std::to_string(c + 1); }

inline std::string term_text(const FactBase& fb, const Term& t) {
    if (t.is_var()) return var_name(t.id);
    return fb.const_symbol(t.type, t.id);
}

inline std::string literal_text(const FactBase& fb, const Literal& l) {
    switch (l.kind) {
        case Literal::Kind::compare:
            return term_text(fb, l.args[0]) + " " + cmp_op_text(l.op) + " " + fmt_double(l.threshold);
        case Literal::Kind::cluster:
            return cluster_pred_name(l.cluster) + "(" + term_text(fb, l.args[0]) + ")";
        case Literal::Kind::relation: {
            std::string out = fb.pred(l.pred).name + "(";
            for (size_t i = 0; i < l.args.size(); ++i) {
                if (i) out += ",";
                out += term_text(fb, l.args[i]);
            }
            return out + ")";
        }
    }
    return "?";
}

// Renumbers variables by first occurrence (head first, then body order).
inline Feature normalize_vars(const Feature& f) {
    std::unordered_map<VarId, VarId> remap;
    auto rename = [&remap](Literal& l) {
        for (Term& t : l.args) {
            if (!t.is_var()) continue;
            auto it = remap.find(t.id);
            if (it == remap.end()) it = remap.emplace(t.id, static_cast<VarId>(remap.size())).first;
            t.id = it->second;
        }
    };
    Feature out = f;
    rename(out.head);
    for (Literal& l : out.body) rename(l);
    return out;
}

inline std::string feature_text(const FactBase& fb, const Feature& f) {
    Feature n = normalize_vars(f);
    std::string out = literal_text(fb, n.head);
    if (!n.body.empty()) {
        out += " :- ";
        for (size_t i = 0; i < n.body.size(); ++i) {
            if (i) out += ", ";
            out += literal_text(fb, n.body[i]);
        }
    }
    return out + ".";
}

}  // namespace lucid
