#include "sonovis/metrics/segmentation.hpp"

#include <algorithm>

namespace sonovis::metrics {

namespace {

constexpr double kIouCutoff = 0.01;

void check_pair(const ClassMap& pred, const ClassMap& gt) {
    require(pred.height == gt.height && pred.width == gt.width, ErrorCode::InvalidInput,
            "segmentation metrics: shape mismatch");
    require(pred.ids.size() == static_cast<size_t>(pred.height) * pred.width &&
                gt.ids.size() == pred.ids.size(),
            ErrorCode::InvalidInput, "segmentation metrics: id buffer size mismatch");
}

}  // namespace

std::optional<double> iou(const ClassMap& pred, const ClassMap& gt, int class_id) {
    check_pair(pred, gt);
    int64_t inter = 0, uni = 0;
    for (size_t i = 0; i < pred.ids.size(); ++i) {
        bool p = pred.ids[i] == class_id;
        bool g = gt.ids[i] == class_id;
        inter += p && g;
        uni += p || g;
    }
    if (uni == 0) return std::nullopt;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

SegMetricReport miou(const std::vector<ClassMap>& preds, const std::vector<ClassMap>& gts,
                     const std::vector<int>& class_set,
                     const std::map<int, std::vector<double>>* external_iou_table) {
    require(!preds.empty() && preds.size() == gts.size(), ErrorCode::InvalidInput,
            "miou: empty or mismatched prediction set");
    require(!class_set.empty(), ErrorCode::InvalidInput, "miou: empty class set");

    // Global intersection/union counts rather than per-image means.
    std::map<int, int64_t> inter, uni;
    for (int c : class_set) inter[c] = uni[c] = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
        check_pair(preds[i], gts[i]);
        const auto& p = preds[i].ids;
        const auto& g = gts[i].ids;
        for (size_t j = 0; j < p.size(); ++j) {
            auto ip = inter.find(p[j]);
            auto ig = inter.find(g[j]);
            if (p[j] == g[j]) {
                if (ip != inter.end()) {
                    ip->second += 1;
                    uni[p[j]] += 1;
                }
            } else {
                if (ip != inter.end()) uni[p[j]] += 1;
                if (ig != inter.end()) uni[g[j]] += 1;
            }
        }
    }

    SegMetricReport report;
    for (int c : class_set) {
        if (uni[c] == 0) continue;  // absent everywhere: not reported
        report.per_class_iou[c] = static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    }

    double total = 0.0;
    for (const auto& [c, value] : report.per_class_iou) {
        bool keep;
        if (external_iou_table != nullptr) {
            auto row = external_iou_table->find(c);
            keep = false;
            if (row != external_iou_table->end()) {
                for (double v : row->second) keep = keep || v >= kIouCutoff;
            }
        } else {
            keep = value >= kIouCutoff;
        }
        if (keep) {
            report.included_classes.push_back(c);
            total += value;
        }
    }
    require(!report.included_classes.empty(), ErrorCode::InvalidInput,
            "miou: no class survives the <1% filter");
    report.miou = total / static_cast<double>(report.included_classes.size());
    return report;
}

}  // namespace sonovis::metrics
