// Tree-augmented naive Bayes over binary features: Chow-Liu tree on
// class-conditional mutual information, Laplace-smoothed CPTs, posterior
// prediction. Models are immutable after training and predict is pure.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lucid/aucpr.hpp"
#include "lucid/matrix.hpp"
#include "lucid/util.hpp"

namespace lucid {

struct TanEdge {
    uint32_t child = 0;
    uint32_t parent = 0;
    double weight = 0.0;
};

struct TanModel {
    double prior_pos = 0.5;
    double smoothing = 1.0;
    std::vector<uint32_t> parent;  // per feature; kNoId means class-only parent
    // cpt[f][c][pv] = P(f=1 | class=c, parent=pv); pv is ignored for roots.
    std::vector<std::array<std::array<double, 2>, 2>> cpt;
    std::vector<TanEdge> edges;
    double tree_weight = 0.0;

    size_t n_features() const { return parent.size(); }
};

// Class-conditional mutual information I(Xi;Xj|C) estimated from counts,
// with the 0*log(0) = 0 convention. Shared by training and the exhaustive
// spanning-tree oracle so both score trees identically.
inline double conditional_mutual_information(const FeatureMatrix& m, size_t i, size_t j) {
    const uint32_t n = m.n_rows;
    BitColumn neg_mask(n);
    for (size_t w = 0; w < neg_mask.n_words(); ++w) neg_mask.word(w) = ~m.labels.word(w);
    // Clear padding bits beyond n.
    if (n % 64) neg_mask.word(neg_mask.n_words() - 1) &= (1ULL << (n % 64)) - 1;

    double total = 0.0;
    for (int c = 0; c < 2; ++c) {
        const BitColumn& mask = c ? m.labels : neg_mask;
        double n_c = c ? m.labels.count() : n - m.labels.count();
        if (n_c == 0) continue;
        double n11 = and_count(m.columns[i], m.columns[j], mask);
        double ni1 = and_count(m.columns[i], mask);
        double nj1 = and_count(m.columns[j], mask);
        double cell[2][2];
        cell[1][1] = n11;
        cell[1][0] = ni1 - n11;
        cell[0][1] = nj1 - n11;
        cell[0][0] = n_c - ni1 - nj1 + n11;
        double marg_i[2] = {n_c - ni1, ni1};
        double marg_j[2] = {n_c - nj1, nj1};
        double mi = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                if (cell[a][b] <= 0.0) continue;
                mi += (cell[a][b] / n_c) * std::log(cell[a][b] * n_c / (marg_i[a] * marg_j[b]));
            }
        total += (n_c / n) * mi;
    }
    return total;
}

namespace detail {

struct UnionFind {
    std::vector<uint32_t> up;
    explicit UnionFind(size_t n) : up(n) {
        for (size_t i = 0; i < n; ++i) up[i] = static_cast<uint32_t>(i);
    }
    uint32_t find(uint32_t x) {
        while (up[x] != x) x = up[x] = up[up[x]];
        return x;
    }
    bool unite(uint32_t a, uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        up[b] = a;
        return true;
    }
};

}  // namespace detail

// Chow-Liu structure learning plus smoothed CPT estimation. Ties on mutual
// information break lexicographically by feature index pair, so the result
// is deterministic.
inline TanModel learn_tan(const FeatureMatrix& m, double smoothing = 1.0) {
    if (smoothing <= 0.0) throw ContractError("learn_tan: smoothing must be > 0");
    const uint32_t n = m.n_rows;
    const uint32_t n_pos = m.labels.count();
    const uint32_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DataError("learn_tan: need at least one example of each class");

    TanModel model;
    model.smoothing = smoothing;
    model.prior_pos = (n_pos + smoothing) / (n + 2.0 * smoothing);
    const uint32_t k = static_cast<uint32_t>(m.n_features());
    model.parent.assign(k, kNoId);
    model.cpt.assign(k, {});
    if (k == 0) return model;

    // Maximum spanning tree over pairwise conditional MI (Kruskal).
    struct Edge {
        double w;
        uint32_t i, j;
    };
    std::vector<Edge> all;
    all.reserve(k * (k - 1) / 2);
    for (uint32_t i = 0; i < k; ++i)
        for (uint32_t j = i + 1; j < k; ++j)
            all.push_back({conditional_mutual_information(m, i, j), i, j});
    std::sort(all.begin(), all.end(), [](const Edge& a, const Edge& b) {
        if (a.w != b.w) return a.w > b.w;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    detail::UnionFind uf(k);
    std::vector<std::vector<std::pair<uint32_t, double>>> adj(k);
    for (const Edge& e : all) {
        if (!uf.unite(e.i, e.j)) continue;
        adj[e.i].emplace_back(e.j, e.w);
        adj[e.j].emplace_back(e.i, e.w);
        model.tree_weight += e.w;
    }

    // Orient edges away from feature 0.
    std::vector<uint32_t> stack{0};
    std::vector<bool> seen(k, false);
    seen[0] = true;
    while (!stack.empty()) {
        uint32_t u = stack.back();
        stack.pop_back();
        for (auto [v, w] : adj[u]) {
            if (seen[v]) continue;
            seen[v] = true;
            model.parent[v] = u;
            model.edges.push_back({v, u, w});
            stack.push_back(v);
        }
    }

    BitColumn neg_mask(n);
    for (size_t w = 0; w < neg_mask.n_words(); ++w) neg_mask.word(w) = ~m.labels.word(w);
    if (n % 64) neg_mask.word(neg_mask.n_words() - 1) &= (1ULL << (n % 64)) - 1;

    for (uint32_t f = 0; f < k; ++f) {
        for (int c = 0; c < 2; ++c) {
            const BitColumn& mask = c ? m.labels : neg_mask;
            double n_c = c ? n_pos : n_neg;
            if (model.parent[f] == kNoId) {
                double n_f1 = and_count(m.columns[f], mask);
                double p = (n_f1 + smoothing) / (n_c + 2.0 * smoothing);
                model.cpt[f][c][0] = model.cpt[f][c][1] = p;
            } else {
                const BitColumn& pc = m.columns[model.parent[f]];
                double n_p1 = and_count(pc, mask);
                double n_f1p1 = and_count(m.columns[f], pc, mask);
                double n_f1 = and_count(m.columns[f], mask);
                double n_f1p0 = n_f1 - n_f1p1;
                model.cpt[f][c][1] = (n_f1p1 + smoothing) / (n_p1 + 2.0 * smoothing);
                model.cpt[f][c][0] = (n_f1p0 + smoothing) / (n_c - n_p1 + 2.0 * smoothing);
            }
        }
    }
    return model;
}

// P(positive | row). Row values must match the model's feature count.
inline double predict(const TanModel& model, std::span<const uint8_t> row) {
    if (row.size() != model.n_features())
        throw ContractError("predict: row length " + std::to_string(row.size()) +
                            " does not match model with " + std::to_string(model.n_features()) +
                            " features");
    double lp[2] = {std::log(1.0 - model.prior_pos), std::log(model.prior_pos)};
    for (size_t f = 0; f < row.size(); ++f) {
        uint8_t pv = model.parent[f] == kNoId ? 0 : row[model.parent[f]];
        for (int c = 0; c < 2; ++c) {
            double p1 = model.cpt[f][c][pv];
            lp[c] += std::log(row[f] ? p1 : 1.0 - p1);
        }
    }
    double mx = std::max(lp[0], lp[1]);
    double e0 = std::exp(lp[0] - mx), e1 = std::exp(lp[1] - mx);
    return e1 / (e0 + e1);
}

// Structured-text serialization (keys: prior, edges, cpt).
inline std::string model_report(const TanModel& model) {
    std::string out;
    out += "prior = " + fmt_double(model.prior_pos) + "\n";
    out += "smoothing = " + fmt_double(model.smoothing) + "\n";
    for (size_t f = 0; f < model.n_features(); ++f) {
        out += "edge f" + std::to_string(f) + " <- ";
        out += model.parent[f] == kNoId ? std::string("class") : "f" + std::to_string(model.parent[f]);
        out += "\n";
    }
    for (size_t f = 0; f < model.n_features(); ++f) {
        for (int c = 0; c < 2; ++c) {
            if (model.parent[f] == kNoId) {
                out += "cpt f" + std::to_string(f) + " | c=" + std::to_string(c) + " : " +
                       fmt_double(model.cpt[f][c][0]) + "\n";
            } else {
                for (int pv = 0; pv < 2; ++pv)
                    out += "cpt f" + std::to_string(f) + " | c=" + std::to_string(c) +
                           ",p=" + std::to_string(pv) + " : " + fmt_double(model.cpt[f][c][pv]) +
                           "\n";
            }
        }
    }
    return out;
}

inline std::string score_report(const ModelScore& score) {
    std::string out = "auc_pr = " + fmt_double(score.auc_pr) + "\ncurve =";
    for (auto [r, p] : score.curve) out += " (" + fmt_double(r) + "," + fmt_double(p) + ")";
    out += "\n";
    return out;
}

}  // namespace lucid
