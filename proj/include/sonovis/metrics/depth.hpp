#pragma once

#include <vector>

#include "sonovis/core/tensor.hpp"

namespace sonovis::metrics {

struct DepthMetricOptions {
    // The headline ABS_rel / SQR_rel divide by the prediction. The flag
    // switches the denominator to ground truth (the Eigen et al. convention).
    bool eigen_denominator = false;
};

struct DepthMetricReport {
    double abs_rel = 0.0;
    double sqr_rel = 0.0;
    double rmse_lin = 0.0;
    double rmse_log = 0.0;
    double auc_crr = 0.0;
    int n_images = 0;
};

// Pixels with gt <= 0 are excluded from every statistic. Each metric is the
// per-image mean over valid pixels, then the mean over images; the RMSE square
// root is applied after the outer mean. Logs are taken on values clamped to
// >= 1e-6, and so are the relative-error denominators.
DepthMetricReport depth_metrics(const std::vector<Tensor>& preds,
                                const std::vector<Tensor>& gts,
                                const DepthMetricOptions& options = {});

// Fraction of valid pixels with |y - yhat| / y strictly below tau.
double crr(const Tensor& pred, const Tensor& gt, double tau);

// Left Riemann sum of Crr_t over tau = 0.00, 0.01, ..., 0.29 with spacing
// 0.01; Crr at each threshold is averaged over images before summation.
double auc_crr(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts);

}  // namespace sonovis::metrics
