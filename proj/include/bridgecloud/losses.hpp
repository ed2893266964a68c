// Prediction/ground-truth matching costs and losses: Dice, binary
// cross-entropy over mask foreground+background, multi-class cross-entropy,
// the weighted bipartite cost matrix, minimum-cost assignment, and the
// matched mask / layered total losses.
#pragma once

#include "core.hpp"

namespace bc {

// Probability clamp for the log terms.
inline constexpr double kProbEpsilon = 1e-7;

// Per-point foreground probabilities for one predicted instance.
struct SoftMask {
    std::vector<double> values;

    SoftMask() = default;
    explicit SoftMask(std::vector<double> v) : values(std::move(v)) {
        for (double p : values)
            if (!(p >= 0.0 && p <= 1.0))
                throw argument_error("SoftMask: probabilities must be in [0,1]");
    }
    std::size_t size() const { return values.size(); }
};

struct GroundTruthInstance {
    std::vector<std::uint8_t> mask;  // 0/1 per point
    int class_label = 0;
};

struct PredictedInstance {
    SoftMask mask;
    std::vector<double> class_probs;  // over the five classes
};

struct LossWeights {
    double lambda_dice = 2.0;
    double lambda_bce = 5.0;
    double lambda_cl = 2.0;
};

// ---------------------------------------------------------------------------
// elementary losses
// ---------------------------------------------------------------------------

// 1 - 2*sum(p*g) / (sum(p) + sum(g)); both masks empty counts as perfect
// agreement (0).
inline double dice_loss(const std::vector<double>& pred, const std::vector<std::uint8_t>& gt) {
    if (pred.size() != gt.size()) throw argument_error("dice_loss: length mismatch");
    double overlap = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        overlap += pred[i] * gt[i];
        mass += pred[i] + gt[i];
    }
    if (mass == 0.0) return 0.0;
    return 1.0 - 2.0 * overlap / mass;
}

// Mean over points of -[g log p + (1-g) log(1-p)], p clamped away from {0,1}.
inline double bce_mask_loss(const std::vector<double>& pred, const std::vector<std::uint8_t>& gt) {
    if (pred.size() != gt.size()) throw argument_error("bce_mask_loss: length mismatch");
    if (pred.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = std::clamp(pred[i], kProbEpsilon, 1.0 - kProbEpsilon);
        total += gt[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return total / static_cast<double>(pred.size());
}

// -log prob[gt_class]; the distribution must sum to 1 within 1e-6.
inline double ce_class_loss(const std::vector<double>& class_probs, int gt_class) {
    if (gt_class < 0 || gt_class >= static_cast<int>(class_probs.size()))
        throw argument_error("ce_class_loss: gt_class out of range");
    double sum = 0.0;
    for (double p : class_probs) {
        if (!(p >= 0.0 && p <= 1.0 + 1e-9))
            throw argument_error("ce_class_loss: probabilities must be in [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw argument_error("ce_class_loss: probabilities must sum to 1");
    return -std::log(std::clamp(class_probs[gt_class], kProbEpsilon, 1.0 - kProbEpsilon));
}

// ---------------------------------------------------------------------------
// cost matrix and assignment
// ---------------------------------------------------------------------------

struct CostMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;  // row-major

    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// C(i,j) = lambda_dice * dice + lambda_bce * bce + lambda_cl * ce for
// prediction i against ground truth j.
inline CostMatrix build_cost_matrix(const std::vector<PredictedInstance>& preds,
                                    const std::vector<GroundTruthInstance>& gts,
                                    const LossWeights& w = {}) {
    CostMatrix cost{preds.size(), gts.size(), {}};
    cost.values.assign(preds.size() * gts.size(), 0.0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t j = 0; j < gts.size(); ++j) {
            if (preds[i].mask.size() != gts[j].mask.size())
                throw argument_error("build_cost_matrix: mask length mismatch");
            cost.at(i, j) = w.lambda_dice * dice_loss(preds[i].mask.values, gts[j].mask) +
                            w.lambda_bce * bce_mask_loss(preds[i].mask.values, gts[j].mask) +
                            w.lambda_cl * ce_class_loss(preds[i].class_probs, gts[j].class_label);
        }
    }
    return cost;
}

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (row = prediction, col = ground truth)
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;

    double total_cost(const CostMatrix& cost) const {
        double t = 0.0;
        for (const auto& [r, c] : pairs) t += cost.at(r, c);
        return t;
    }
};

// Minimum-cost one-to-one assignment of size min(rows, cols); rectangular
// inputs are padded to square with zero-cost dummies, which leaves the
// optimal matched cost unchanged. Jonker-Volgenant style shortest
// augmenting paths, O(n^3).
inline Assignment hungarian_assign(const CostMatrix& cost) {
    const int rows = static_cast<int>(cost.rows);
    const int cols = static_cast<int>(cost.cols);
    Assignment result;
    if (rows == 0 || cols == 0) {
        for (int i = 0; i < rows; ++i) result.unmatched_rows.push_back(i);
        for (int j = 0; j < cols; ++j) result.unmatched_cols.push_back(j);
        return result;
    }
    for (const double v : cost.values)
        if (!std::isfinite(v)) throw argument_error("hungarian_assign: costs must be finite");

    const int n = std::max(rows, cols);
    auto entry = [&](int i, int j) {
        return i < rows && j < cols ? cost.at(i, j) : 0.0;
    };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match_col(n + 1, 0);  // column -> row (1-based)
    std::vector<int> way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match_col[0] = i;
        int j0 = 0;
        std::vector<double> min_v(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match_col[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = entry(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < min_v[j]) {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if (min_v[j] < delta) {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[j0] != 0);
        do {
            const int j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<char> row_matched(rows, 0), col_matched(cols, 0);
    for (int j = 1; j <= n; ++j) {
        const int i = match_col[j];
        if (i >= 1 && i <= rows && j <= cols) {
            result.pairs.emplace_back(i - 1, j - 1);
            row_matched[i - 1] = 1;
            col_matched[j - 1] = 1;
        }
    }
    std::sort(result.pairs.begin(), result.pairs.end());
    for (int i = 0; i < rows; ++i)
        if (!row_matched[i]) result.unmatched_rows.push_back(i);
    for (int j = 0; j < cols; ++j)
        if (!col_matched[j]) result.unmatched_cols.push_back(j);
    return result;
}

// ---------------------------------------------------------------------------
// aggregate losses
// ---------------------------------------------------------------------------

// Sum over matched pairs of lambda_bce * bce + lambda_dice * dice.
inline double matched_mask_loss(const Assignment& assignment,
                                const std::vector<PredictedInstance>& preds,
                                const std::vector<GroundTruthInstance>& gts,
                                const LossWeights& w = {}) {
    double total = 0.0;
    for (const auto& [pi, gi] : assignment.pairs) {
        if (pi < 0 || pi >= static_cast<int>(preds.size()) || gi < 0 ||
            gi >= static_cast<int>(gts.size()))
            throw argument_error("matched_mask_loss: assignment index out of range");
        total += w.lambda_bce * bce_mask_loss(preds[pi].mask.values, gts[gi].mask) +
                 w.lambda_dice * dice_loss(preds[pi].mask.values, gts[gi].mask);
    }
    return total;
}

// Sum over layers of mask_loss + lambda_cl * ce_loss.
inline double total_loss(const std::vector<std::pair<double, double>>& per_layer,
                         double lambda_cl) {
    if (per_layer.empty()) throw argument_error("total_loss: need at least one layer");
    double total = 0.0;
    for (const auto& [mask_loss, ce_loss] : per_layer) total += mask_loss + lambda_cl * ce_loss;
    return total;
}

}  // namespace bc
