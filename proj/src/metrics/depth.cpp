#include "sonovis/metrics/depth.hpp"

#include <algorithm>
#include <cmath>

namespace sonovis::metrics {

namespace {

constexpr double kClamp = 1e-6;

void check_pair(const Tensor& pred, const Tensor& gt) {
    require(pred.shape == gt.shape, ErrorCode::InvalidInput,
            "depth metrics: shape mismatch " + shape_str(pred.shape) + " vs " + shape_str(gt.shape));
    require(pred.numel() > 0, ErrorCode::InvalidInput, "depth metrics: empty image");
}

void check_set(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts) {
    require(!preds.empty(), ErrorCode::InvalidInput, "depth metrics: empty prediction list");
    require(preds.size() == gts.size(), ErrorCode::InvalidInput,
            "depth metrics: prediction/ground-truth count mismatch");
}

struct ImageStats {
    double abs_rel, sqr_rel, mse_lin, mse_log;
};

ImageStats image_stats(const Tensor& pred, const Tensor& gt, bool eigen_denominator) {
    check_pair(pred, gt);
    double abs_rel = 0, sqr_rel = 0, mse_lin = 0, mse_log = 0;
    int64_t valid = 0;
    for (int64_t i = 0; i < gt.numel(); ++i) {
        double y = gt[i];
        if (y <= 0.0) continue;
        double yhat = pred[i];
        double denom = std::max(eigen_denominator ? y : yhat, kClamp);
        double diff = y - yhat;
        abs_rel += std::abs(diff) / denom;
        sqr_rel += diff * diff / denom;
        mse_lin += diff * diff;
        double dl = std::log(std::max(y, kClamp)) - std::log(std::max(yhat, kClamp));
        mse_log += dl * dl;
        ++valid;
    }
    require(valid > 0, ErrorCode::InvalidInput, "depth metrics: image with no valid (gt > 0) pixels");
    double n = static_cast<double>(valid);
    return {abs_rel / n, sqr_rel / n, mse_lin / n, mse_log / n};
}

}  // namespace

double crr(const Tensor& pred, const Tensor& gt, double tau) {
    check_pair(pred, gt);
    require(tau >= 0.0, ErrorCode::InvalidInput, "crr: negative threshold");
    int64_t below = 0, valid = 0;
    for (int64_t i = 0; i < gt.numel(); ++i) {
        double y = gt[i];
        if (y <= 0.0) continue;
        ++valid;
        if (std::abs(y - pred[i]) / y < tau) ++below;
    }
    require(valid > 0, ErrorCode::InvalidInput, "crr: image with no valid pixels");
    return static_cast<double>(below) / static_cast<double>(valid);
}

double auc_crr(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts) {
    check_set(preds, gts);
    double auc = 0.0;
    for (int t = 0; t < 30; ++t) {
        double tau = 0.01 * t;
        double mean_crr = 0.0;
        for (size_t i = 0; i < preds.size(); ++i) mean_crr += crr(preds[i], gts[i], tau);
        mean_crr /= static_cast<double>(preds.size());
        auc += mean_crr * 0.01;
    }
    return auc;
}

DepthMetricReport depth_metrics(const std::vector<Tensor>& preds,
                                const std::vector<Tensor>& gts,
                                const DepthMetricOptions& options) {
    check_set(preds, gts);
    double abs_rel = 0, sqr_rel = 0, mse_lin = 0, mse_log = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
        ImageStats s = image_stats(preds[i], gts[i], options.eigen_denominator);
        abs_rel += s.abs_rel;
        sqr_rel += s.sqr_rel;
        mse_lin += s.mse_lin;
        mse_log += s.mse_log;
    }
    double n = static_cast<double>(preds.size());
    DepthMetricReport report;
    report.abs_rel = abs_rel / n;
    report.sqr_rel = sqr_rel / n;
    report.rmse_lin = std::sqrt(mse_lin / n);
    report.rmse_log = std::sqrt(mse_log / n);
    report.auc_crr = auc_crr(preds, gts);
    report.n_images = static_cast<int>(preds.size());
    return report;
}

}  // namespace sonovis::metrics
