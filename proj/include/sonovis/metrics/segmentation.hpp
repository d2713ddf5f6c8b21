#pragma once

#include <map>
#include <optional>
#include <vector>

#include "sonovis/core/tensor.hpp"

namespace sonovis::metrics {

// Class-id map with explicit geometry.
struct ClassMap {
    int height = 0;
    int width = 0;
    std::vector<int> ids;  // row-major, height*width entries
};

struct SegMetricReport {
    std::map<int, double> per_class_iou;  // classes present in pred or gt
    std::vector<int> included_classes;    // survivors of the <1% filter
    double miou = 0.0;
};

// IoU of one class's pixel sets. nullopt when the class appears in neither
// map (reported-absent, excluded from averages).
std::optional<double> iou(const ClassMap& pred, const ClassMap& gt, int class_id);

// Aggregates IoU from global confusion counts over the whole set. Classes
// scoring below 1% are removed; when `external_iou_table` is provided (one
// IoU row per compared method, keyed by class), a class is removed only if it
// is below 1% for every method.
SegMetricReport miou(const std::vector<ClassMap>& preds, const std::vector<ClassMap>& gts,
                     const std::vector<int>& class_set,
                     const std::map<int, std::vector<double>>* external_iou_table = nullptr);

}  // namespace sonovis::metrics
