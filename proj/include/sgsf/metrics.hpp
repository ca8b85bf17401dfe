#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sgsf/grid.hpp"

namespace sgsf {

// One evaluated test image: raw anomaly map, smoothed-max image score, and
// ground truth where available.
struct ScoredResult {
    AnomalyMap map;
    double score = 0.0;
    std::string stem;
    int image_label = 0; // 1 = anomalous
    bool has_pixel_labels = false;
    PixelLabels pixel_labels;
    int smoothing_window = 0;
};

struct MetricsReport {
    std::string category;
    std::string config_fingerprint;

    double auroc_det = 0.0;

    // Image-level threshold sweep (best F1)
    double f1 = 0.0;
    double tpr = 0.0;
    double tnr = 0.0;
    double acc = 0.0;
    double macc = 0.0;
    double threshold = 0.0;

    // Pixel-level localization; absent when no test item carries a mask
    bool has_pixel_metrics = false;
    double auroc_loc = 0.0;
    double ap_loc = 0.0;

    int n_test = 0;
    int n_anomalous = 0;
    int n_normal = 0;
    std::size_t n_pixels = 0;
    std::size_t n_anomalous_pixels = 0;
};

// Box-filter the map (zero padding, w x w) and take the max of the result as
// the image-level anomaly score.
std::pair<AnomalyMap, double> smooth_and_score(const AnomalyMap& map, int window);

// Rank-based AUROC (Mann-Whitney), ties counted 1/2. Requires both classes.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Step-interpolated average precision over descending score thresholds.
// Requires at least one positive.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

struct ThresholdMetrics {
    double f1 = 0.0;
    double tpr = 0.0;
    double tnr = 0.0;
    double acc = 0.0;
    double macc = 0.0;
    double threshold = 0.0;
};

// Sweep thresholds (midpoints of consecutive distinct scores plus the two
// all-one-class extremes), keep the best F1. Prediction rule: score >= t.
ThresholdMetrics threshold_metrics(const std::vector<double>& scores,
                                   const std::vector<int>& labels);

struct PixelMetrics {
    double auroc_loc = 0.0;
    double ap_loc = 0.0;
    std::size_t n_pixels = 0;
    std::size_t n_anomalous_pixels = 0;
};

// Flattens the pixels of every result with known pixel labels into one
// population. Returns nullopt when nothing carries labels or when no
// anomalous pixel exists (classification-only datasets).
std::optional<PixelMetrics> pixel_metrics(const std::vector<ScoredResult>& results);

MetricsReport assemble_report(const std::vector<ScoredResult>& results,
                              const std::string& category,
                              const std::string& fingerprint);

} // namespace sgsf
