// Area under the precision-recall curve. Equal scores collapse into one cut
// point, and the area between achievable points uses the nonlinear
// TP-count interpolation (precision as a function of interpolated TP/FP
// counts), not straight-line interpolation in PR space.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "lucid/util.hpp"

namespace lucid {

struct ModelScore {
    double auc_pr = 0.0;
    std::vector<std::pair<double, double>> curve;  // (recall, precision) per cut
};

namespace detail {

// Exact integral of precision over TP in [a, b] where FP interpolates
// linearly from f at TP=a to g at TP=b:
//   precision(x) = x / (alpha * x + beta),  alpha = 1 + s,  beta = f - s*a,
// with s = (g - f) / (b - a). Closed form of the integral:
//   (b - a)/alpha - beta/alpha^2 * ln((b + g) / (a + f)).
inline double tp_interp_area(double a, double f, double b, double g) {
    double s = (g - f) / (b - a);
    double alpha = 1.0 + s;
    double beta = f - s * a;
    // beta == 0 covers the origin segment: precision is constant 1/alpha.
    if (a + f <= 0.0 || beta == 0.0) return (b - a) / alpha;
    return (b - a) / alpha - beta / (alpha * alpha) * std::log((b + g) / (a + f));
}

}  // namespace detail

// labels: 1 = positive. Requires at least one positive example.
inline ModelScore auc_pr(std::span<const double> scores, std::span<const uint8_t> labels) {
    if (scores.size() != labels.size())
        throw ContractError("auc_pr: scores and labels differ in length");
    size_t n_pos = 0;
    for (uint8_t l : labels) n_pos += l;
    if (n_pos == 0) throw DataError("auc_pr undefined: no positive examples");

    std::vector<uint32_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&scores](uint32_t a, uint32_t b) { return scores[a] > scores[b]; });

    // Achievable (TP, FP) cut points, one per distinct score value.
    std::vector<std::pair<uint32_t, uint32_t>> cuts;
    uint32_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]]) ++tp;
            else ++fp;
            ++j;
        }
        cuts.emplace_back(tp, fp);
        i = j;
    }

    ModelScore out;
    double area = 0.0;
    double prev_tp = 0.0, prev_fp = 0.0;
    for (auto [ctp, cfp] : cuts) {
        if (ctp > prev_tp)
            area += detail::tp_interp_area(prev_tp, prev_fp, ctp, cfp);
        prev_tp = ctp;
        prev_fp = cfp;
        if (ctp + cfp > 0)
            out.curve.emplace_back(static_cast<double>(ctp) / static_cast<double>(n_pos),
                                   static_cast<double>(ctp) / static_cast<double>(ctp + cfp));
    }
    out.auc_pr = area / static_cast<double>(n_pos);
    return out;
}

}  // namespace lucid
