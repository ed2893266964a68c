// Instance-segmentation scoring: IoU over point-index sets, greedy
// confidence-ordered AP with all-points precision-envelope interpolation,
// DBSCAN clustering with canonical labeling, DBSCAN-based prediction
// refinement, and a non-neural baseline segmenter for end-to-end runs.
#pragma once

#include "core.hpp"
#include "io.hpp"

#include <json.hpp>

#include <functional>
#include <iomanip>
#include <map>
#include <unordered_map>

namespace bc {

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

// Sorted, duplicate-free point indices into the evaluated cloud.
using IndexSet = std::vector<std::uint32_t>;

inline IndexSet make_index_set(std::vector<std::uint32_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return indices;
}

struct InstancePrediction {
    IndexSet indices;
    int class_label = 0;
    double confidence = 1.0;
};

struct GroundTruthMask {
    IndexSet indices;
    int class_label = 0;
};

struct DbscanParams {
    double eps = 0.92;  // meters
    int min_pts = 4;    // neighbors within eps, counting the point itself
};

// Thresholds 0.50..0.95 step 0.05 (averaged into mAP) plus 0.25.
inline std::vector<double> standard_iou_thresholds() {
    std::vector<double> t{0.25};
    for (int i = 0; i <= 9; ++i) t.push_back(0.50 + 0.05 * i);
    return t;
}

struct EvalReport {
    std::vector<double> thresholds;
    // class -> AP per threshold (same order as `thresholds`)
    std::map<int, std::vector<double>> ap_per_class;
    std::map<int, int> gt_instances_per_class;
    double map = 0.0;    // mean over classes of mean AP over thresholds >= 0.5
    double map50 = 0.0;
    double map25 = 0.0;
    int gt_count = 0;
    int pred_count = 0;
};

// ---------------------------------------------------------------------------
// IoU and precision
// ---------------------------------------------------------------------------

// |a intersect b| / |a union b| over sorted index sets; both empty -> 0.
inline double instance_iou(const IndexSet& a, const IndexSet& b) {
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) { ++inter; ++i; ++j; }
        else if (a[i] < b[j]) ++i;
        else ++j;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double precision(std::size_t tp, std::size_t fp) {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

// ---------------------------------------------------------------------------
// average precision
// ---------------------------------------------------------------------------

namespace detail {

// Area under the precision envelope (all-points interpolation) of a
// cumulative PR sequence.
inline double pr_curve_area(const std::vector<double>& recall_pts,
                            const std::vector<double>& precision_pts) {
    if (recall_pts.empty()) return 0.0;
    const std::size_t n = recall_pts.size();
    std::vector<double> envelope(n);
    double running = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        running = std::max(running, precision_pts[i]);
        envelope[i] = running;
    }
    double area = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        area += (recall_pts[i] - prev_recall) * envelope[i];
        prev_recall = recall_pts[i];
    }
    return area;
}

}  // namespace detail

// Greedy protocol: per class, predictions sorted by descending confidence
// (ties by input index) each claim the unmatched ground truth of their class
// with the highest IoU; the claim counts as a true positive when that IoU
// reaches the threshold. Classes without ground truth are excluded from the
// means.
inline EvalReport evaluate_ap(const std::vector<InstancePrediction>& preds,
                              const std::vector<GroundTruthMask>& gts,
                              const std::vector<double>& thresholds = standard_iou_thresholds()) {
    for (const auto& p : preds)
        if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
            throw argument_error("evaluate_ap: confidence must be in [0,1]");

    EvalReport report;
    report.thresholds = thresholds;
    report.gt_count = static_cast<int>(gts.size());
    report.pred_count = static_cast<int>(preds.size());

    std::map<int, std::vector<std::size_t>> gts_by_class;
    for (std::size_t g = 0; g < gts.size(); ++g) gts_by_class[gts[g].class_label].push_back(g);

    for (const auto& [cls, gt_ids] : gts_by_class) {
        report.gt_instances_per_class[cls] = static_cast<int>(gt_ids.size());

        std::vector<std::size_t> pred_ids;
        for (std::size_t p = 0; p < preds.size(); ++p)
            if (preds[p].class_label == cls) pred_ids.push_back(p);
        std::stable_sort(pred_ids.begin(), pred_ids.end(), [&](std::size_t a, std::size_t b) {
            return preds[a].confidence > preds[b].confidence;
        });

        // IoU is threshold-independent; compute the pred x gt block once
        std::vector<std::vector<double>> iou(pred_ids.size(),
                                             std::vector<double>(gt_ids.size(), 0.0));
        for (std::size_t pi = 0; pi < pred_ids.size(); ++pi)
            for (std::size_t gi = 0; gi < gt_ids.size(); ++gi)
                iou[pi][gi] = instance_iou(preds[pred_ids[pi]].indices, gts[gt_ids[gi]].indices);

        std::vector<double>& aps = report.ap_per_class[cls];
        aps.resize(thresholds.size(), 0.0);
        for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
            const double tau = thresholds[ti];
            std::vector<char> taken(gt_ids.size(), 0);
            std::vector<double> recall_pts, precision_pts;
            std::size_t tp = 0, fp = 0;
            for (std::size_t pi = 0; pi < pred_ids.size(); ++pi) {
                double best_iou = -1.0;
                std::size_t best_gi = 0;
                for (std::size_t gi = 0; gi < gt_ids.size(); ++gi) {
                    if (taken[gi]) continue;
                    if (iou[pi][gi] > best_iou) {
                        best_iou = iou[pi][gi];
                        best_gi = gi;
                    }
                }
                if (best_iou >= tau) {
                    taken[best_gi] = 1;
                    ++tp;
                } else {
                    ++fp;
                }
                recall_pts.push_back(static_cast<double>(tp) / static_cast<double>(gt_ids.size()));
                precision_pts.push_back(precision(tp, fp));
            }
            aps[ti] = detail::pr_curve_area(recall_pts, precision_pts);
        }
    }

    // aggregates
    double sum_map = 0.0, sum_50 = 0.0, sum_25 = 0.0;
    int classes = 0;
    for (const auto& [cls, aps] : report.ap_per_class) {
        ++classes;
        double acc = 0.0;
        int n_high = 0;
        for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
            if (thresholds[ti] >= 0.5 - 1e-12) {
                acc += aps[ti];
                ++n_high;
            }
            if (std::abs(thresholds[ti] - 0.50) < 1e-12) sum_50 += aps[ti];
            if (std::abs(thresholds[ti] - 0.25) < 1e-12) sum_25 += aps[ti];
        }
        if (n_high > 0) sum_map += acc / n_high;
    }
    if (classes > 0) {
        report.map = sum_map / classes;
        report.map50 = sum_50 / classes;
        report.map25 = sum_25 / classes;
    }
    return report;
}

// ---------------------------------------------------------------------------
// DBSCAN
// ---------------------------------------------------------------------------

// Standard semantics with order-independent tie-breaking:
//  * a point is core when it has >= min_pts neighbors within eps
//    (closed ball, counting itself),
//  * clusters are the density-connected components of core points,
//  * a border point joins the cluster of its nearest core neighbor
//    (distance ties fall to the lower point index),
//  * unreachable points are noise (-1).
// Cluster ids are canonical: numbered by each cluster's lowest point index.
inline std::vector<int> dbscan(const std::vector<Vec3>& points, const DbscanParams& params) {
    if (!(params.eps > 0.0)) throw argument_error("dbscan: eps must be positive");
    if (params.min_pts < 1) throw argument_error("dbscan: min_pts must be >= 1");
    const std::size_t n = points.size();
    std::vector<int> labels(n, -1);
    if (n == 0) return labels;

    // uniform grid with cell size eps; neighbor search scans the 27 cells
    struct CellHash {
        std::size_t operator()(const std::array<std::int64_t, 3>& c) const {
            return static_cast<std::size_t>(
                split_mix64(static_cast<std::uint64_t>(c[0]) * 0x9e3779b97f4a7c15ull ^
                            split_mix64(static_cast<std::uint64_t>(c[1])) ^
                            split_mix64(static_cast<std::uint64_t>(c[2]) + 0x517cc1b727220a95ull)));
        }
    };
    auto cell_of = [&](const Vec3& p) {
        return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor(p.x / params.eps)),
                                           static_cast<std::int64_t>(std::floor(p.y / params.eps)),
                                           static_cast<std::int64_t>(std::floor(p.z / params.eps))};
    };
    std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::uint32_t>, CellHash> grid;
    grid.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) grid[cell_of(points[i])].push_back(i);

    const double eps_sq = params.eps * params.eps;
    auto for_each_neighbor = [&](std::uint32_t i, auto&& fn) {
        const auto c = cell_of(points[i]);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
                    if (it == grid.end()) continue;
                    for (std::uint32_t j : it->second)
                        if ((points[i] - points[j]).norm_squared() <= eps_sq) fn(j);
                }
    };

    std::vector<char> core(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        int count = 0;
        for_each_neighbor(i, [&](std::uint32_t) { ++count; });
        core[i] = count >= params.min_pts;
    }

    // union-find over core points
    std::vector<std::uint32_t> parent(n);
    for (std::uint32_t i = 0; i < n; ++i) parent[i] = i;
    std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!core[i]) continue;
        for_each_neighbor(i, [&](std::uint32_t j) {
            if (core[j]) parent[find(i)] = find(j);
        });
    }

    // provisional labels: cluster root index for cores, nearest core for borders
    std::vector<std::int64_t> provisional(n, -1);
    for (std::uint32_t i = 0; i < n; ++i)
        if (core[i]) provisional[i] = find(i);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        double best_d = std::numeric_limits<double>::infinity();
        std::int64_t best_core = -1;
        for_each_neighbor(i, [&](std::uint32_t j) {
            if (!core[j]) return;
            const double d = (points[i] - points[j]).norm_squared();
            if (d < best_d || (d == best_d && static_cast<std::int64_t>(j) < best_core)) {
                best_d = d;
                best_core = j;
            }
        });
        if (best_core >= 0) provisional[i] = find(static_cast<std::uint32_t>(best_core));
    }

    // canonical renumbering by lowest contained point index
    std::map<std::int64_t, std::uint32_t> lowest_member;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (provisional[i] < 0) continue;
        const auto it = lowest_member.find(provisional[i]);
        if (it == lowest_member.end()) lowest_member.emplace(provisional[i], i);
    }
    std::vector<std::pair<std::uint32_t, std::int64_t>> order;  // (lowest index, root)
    order.reserve(lowest_member.size());
    for (const auto& [root, low] : lowest_member) order.emplace_back(low, root);
    std::sort(order.begin(), order.end());
    std::map<std::int64_t, int> root_to_id;
    for (std::size_t k = 0; k < order.size(); ++k) root_to_id[order[k].second] = static_cast<int>(k);
    for (std::uint32_t i = 0; i < n; ++i)
        labels[i] = provisional[i] < 0 ? -1 : root_to_id[provisional[i]];
    return labels;
}

// ---------------------------------------------------------------------------
// refinement and baseline
// ---------------------------------------------------------------------------

// Re-cluster each prediction's points; every resulting cluster becomes its
// own prediction with the parent's class and confidence. Noise points are
// dropped; predictions that dissolve entirely are removed.
inline std::vector<InstancePrediction> refine_instances_dbscan(
    const LabeledPointCloud& cloud, const std::vector<InstancePrediction>& preds,
    const DbscanParams& params = {}) {
    std::vector<InstancePrediction> refined;
    for (const InstancePrediction& pred : preds) {
        std::vector<Vec3> positions;
        positions.reserve(pred.indices.size());
        for (std::uint32_t idx : pred.indices) {
            if (idx >= cloud.size())
                throw argument_error("refine_instances_dbscan: index beyond cloud size");
            positions.push_back(cloud.points[idx].position);
        }
        const std::vector<int> labels = dbscan(positions, params);
        std::map<int, IndexSet> clusters;
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (labels[k] >= 0) clusters[labels[k]].push_back(pred.indices[k]);
        for (auto& [label, indices] : clusters)
            refined.push_back({make_index_set(std::move(indices)), pred.class_label,
                               pred.confidence});
    }
    return refined;
}

// Ground-truth-semantics baseline: cluster each semantic class's points with
// DBSCAN; every cluster becomes one full-confidence prediction.
inline std::vector<InstancePrediction> baseline_segment(const LabeledPointCloud& cloud,
                                                        const DbscanParams& params = {}) {
    std::map<int, std::vector<std::uint32_t>> by_class;
    for (std::uint32_t i = 0; i < cloud.size(); ++i)
        by_class[cloud.points[i].semantic].push_back(i);

    std::vector<InstancePrediction> preds;
    for (const auto& [cls, indices] : by_class) {
        std::vector<Vec3> positions;
        positions.reserve(indices.size());
        for (std::uint32_t i : indices) positions.push_back(cloud.points[i].position);
        const std::vector<int> labels = dbscan(positions, params);
        std::map<int, IndexSet> clusters;
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (labels[k] >= 0) clusters[labels[k]].push_back(indices[k]);
        for (auto& [label, set] : clusters)
            preds.push_back({make_index_set(std::move(set)), cls, 1.0});
    }
    return preds;
}

// Ground-truth instances straight from a labeled cloud: one mask per
// distinct (semantic, instance) pair, ordered by that pair.
inline std::vector<GroundTruthMask> instances_from_labels(const LabeledPointCloud& cloud) {
    std::map<std::pair<int, std::uint32_t>, IndexSet> groups;
    for (std::uint32_t i = 0; i < cloud.size(); ++i)
        groups[{cloud.points[i].semantic, cloud.points[i].instance}].push_back(i);
    std::vector<GroundTruthMask> gts;
    gts.reserve(groups.size());
    for (auto& [key, indices] : groups) gts.push_back({std::move(indices), key.first});
    return gts;
}

// Label-derived predictions (confidence 1): lets a labeled cloud act as the
// prediction side of an evaluation.
inline std::vector<InstancePrediction> predictions_from_labels(const LabeledPointCloud& cloud) {
    std::vector<InstancePrediction> preds;
    for (GroundTruthMask& gt : instances_from_labels(cloud))
        preds.push_back({std::move(gt.indices), gt.class_label, 1.0});
    return preds;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["mAP"] = report.map;
    j["mAP50"] = report.map50;
    j["mAP25"] = report.map25;
    j["gt_count"] = report.gt_count;
    j["pred_count"] = report.pred_count;
    j["thresholds"] = report.thresholds;
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& [cls, aps] : report.ap_per_class) {
        nlohmann::json jc;
        jc["ap_per_threshold"] = aps;
        jc["gt_instances"] = report.gt_instances_per_class.at(cls);
        per_class[std::string(semantic_class_name(static_cast<SemanticClass>(cls)))] = jc;
    }
    j["classes"] = per_class;
    return j;
}

// Aligned table, one row per experiment, columns mAP / mAP50 / mAP25.
inline std::string format_report_table(
    const std::vector<std::pair<std::string, EvalReport>>& rows) {
    std::size_t label_width = 10;
    for (const auto& [label, report] : rows) label_width = std::max(label_width, label.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_width) + 2) << "Experiment"
        << std::right << std::setw(8) << "mAP" << std::setw(8) << "mAP50" << std::setw(8)
        << "mAP25" << "\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& [label, report] : rows) {
        out << std::left << std::setw(static_cast<int>(label_width) + 2) << label << std::right
            << std::setw(8) << report.map << std::setw(8) << report.map50 << std::setw(8)
            << report.map25 << "\n";
    }
    return out.str();
}

// Prediction interchange file: the .txt cloud format carries labels but no
// confidences, so predictions travel as JSON.
inline nlohmann::json predictions_to_json(const std::vector<InstancePrediction>& preds,
                                          std::size_t point_count) {
    nlohmann::json j;
    j["point_count"] = point_count;
    j["predictions"] = nlohmann::json::array();
    for (const InstancePrediction& p : preds) {
        nlohmann::json jp;
        jp["class"] = p.class_label;
        jp["confidence"] = p.confidence;
        jp["indices"] = p.indices;
        j["predictions"].push_back(std::move(jp));
    }
    return j;
}

inline void write_predictions_json(const std::vector<InstancePrediction>& preds,
                                   std::size_t point_count, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("write_predictions_json: cannot open " + path);
    out << predictions_to_json(preds, point_count).dump(2) << "\n";
    if (!out) throw io_error("write_predictions_json: write failed for " + path);
}

inline std::vector<InstancePrediction> read_predictions_json(const std::string& path,
                                                             std::size_t* point_count = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("read_predictions_json: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path, 0, std::string("invalid JSON: ") + e.what());
    }
    if (!j.contains("predictions"))
        throw parse_error(path, 0, "prediction file missing required key \"predictions\"");
    if (point_count) *point_count = j.value("point_count", std::size_t{0});
    std::vector<InstancePrediction> preds;
    for (const auto& jp : j["predictions"]) {
        InstancePrediction p;
        p.class_label = detail::require_key(jp, "class", path).get<int>();
        p.confidence = detail::require_key(jp, "confidence", path).get<double>();
        p.indices = make_index_set(
            detail::require_key(jp, "indices", path).get<std::vector<std::uint32_t>>());
        preds.push_back(std::move(p));
    }
    return preds;
}

}  // namespace bc
