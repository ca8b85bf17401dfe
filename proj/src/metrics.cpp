#include "sgsf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgsf/error.hpp"

namespace sgsf {
namespace {

void check_population(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ValidationError("metrics: scores and labels differ in length");
    if (scores.empty()) throw ValidationError("metrics: empty population");
}

} // namespace

std::pair<AnomalyMap, double> smooth_and_score(const AnomalyMap& map, int window) {
    if (window < 1 || window % 2 == 0)
        throw ValidationError("smoothing window must be odd and >= 1");
    const int r = window / 2;
    const int h = map.h, w = map.w;

    // Zero-padded box mean via running sums, constant w*w denominator.
    Grid tmp(h, w);
    for (int y = 0; y < h; ++y) {
        double run = 0.0;
        for (int x = 0; x <= r && x < w; ++x) run += map.at(y, x);
        for (int x = 0; x < w; ++x) {
            tmp.at(y, x) = run;
            const int add = x + r + 1;
            const int sub = x - r;
            if (add < w) run += map.at(y, add);
            if (sub >= 0) run -= map.at(y, sub);
        }
    }
    AnomalyMap out(h, w);
    const double inv = 1.0 / (static_cast<double>(window) * window);
    for (int x = 0; x < w; ++x) {
        double run = 0.0;
        for (int y = 0; y <= r && y < h; ++y) run += tmp.at(y, x);
        for (int y = 0; y < h; ++y) {
            out.at(y, x) = run * inv;
            const int add = y + r + 1;
            const int sub = y - r;
            if (add < h) run += tmp.at(add, x);
            if (sub >= 0) run -= tmp.at(sub, x);
        }
    }
    double score = out.v[0];
    for (double v : out.v) score = std::max(score, v);
    return {std::move(out), score};
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_population(scores, labels);
    const size_t n = scores.size();
    size_t n_pos = 0;
    for (int l : labels) n_pos += l != 0;
    const size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw ValidationError("auroc undefined: population has a single class");

    // Mann-Whitney with midranks for ties.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](size_t a, size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t t = i; t <= j; ++t)
            if (labels[order[t]] != 0) rank_sum_pos += midrank;
        i = j + 1;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_population(scores, labels);
    size_t n_pos = 0;
    for (int l : labels) n_pos += l != 0;
    if (n_pos == 0) throw ValidationError("average precision undefined: no positives");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](size_t a, size_t b) { return scores[a] > scores[b]; });

    // Walk descending thresholds; ties form a single threshold step.
    double ap = 0.0;
    double prev_recall = 0.0;
    size_t tp = 0, seen = 0;
    size_t i = 0;
    const size_t n = scores.size();
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        for (size_t t = i; t <= j; ++t) {
            ++seen;
            if (labels[order[t]] != 0) ++tp;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    return ap;
}

ThresholdMetrics threshold_metrics(const std::vector<double>& scores,
                                   const std::vector<int>& labels) {
    check_population(scores, labels);
    size_t n_pos = 0;
    for (int l : labels) n_pos += l != 0;
    const size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw ValidationError("threshold metrics undefined: population has a single class");

    std::vector<double> uniq(scores);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    std::vector<double> candidates;
    candidates.push_back(uniq.front() - 1.0); // predict everything positive
    for (size_t i = 0; i + 1 < uniq.size(); ++i)
        candidates.push_back(0.5 * (uniq[i] + uniq[i + 1]));
    candidates.push_back(uniq.back() + 1.0); // predict everything negative

    ThresholdMetrics best;
    double best_f1 = -1.0;
    for (double t : candidates) {
        size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            const bool pred = scores[i] >= t;
            if (labels[i] != 0)
                pred ? ++tp : ++fn;
            else
                pred ? ++fp : ++tn;
        }
        const double f1 = tp == 0 ? 0.0
                                  : 2.0 * tp / (2.0 * static_cast<double>(tp) + fp + fn);
        if (f1 > best_f1) {
            best_f1 = f1;
            best.f1 = f1;
            best.tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
            best.tnr = static_cast<double>(tn) / static_cast<double>(n_neg);
            best.acc = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
            best.macc = 0.5 * (best.tpr + best.tnr);
            best.threshold = t;
        }
    }
    return best;
}

std::optional<PixelMetrics> pixel_metrics(const std::vector<ScoredResult>& results) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& r : results) {
        if (!r.has_pixel_labels) continue;
        scores.insert(scores.end(), r.map.v.begin(), r.map.v.end());
        for (double l : r.pixel_labels.v) labels.push_back(l != 0.0 ? 1 : 0);
    }
    if (scores.empty()) return std::nullopt;
    size_t n_pos = 0;
    for (int l : labels) n_pos += l;
    if (n_pos == 0 || n_pos == labels.size()) return std::nullopt;

    PixelMetrics pm;
    pm.auroc_loc = auroc(scores, labels);
    pm.ap_loc = average_precision(scores, labels);
    pm.n_pixels = scores.size();
    pm.n_anomalous_pixels = n_pos;
    return pm;
}

MetricsReport assemble_report(const std::vector<ScoredResult>& results,
                              const std::string& category, const std::string& fingerprint) {
    if (results.empty()) throw ValidationError("evaluation requires at least one test item");
    MetricsReport rep;
    rep.category = category;
    rep.config_fingerprint = fingerprint;

    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& r : results) {
        scores.push_back(r.score);
        labels.push_back(r.image_label);
    }
    rep.n_test = static_cast<int>(results.size());
    for (int l : labels) l != 0 ? ++rep.n_anomalous : ++rep.n_normal;

    rep.auroc_det = auroc(scores, labels);
    const ThresholdMetrics tm = threshold_metrics(scores, labels);
    rep.f1 = tm.f1;
    rep.tpr = tm.tpr;
    rep.tnr = tm.tnr;
    rep.acc = tm.acc;
    rep.macc = tm.macc;
    rep.threshold = tm.threshold;

    if (auto pm = pixel_metrics(results)) {
        rep.has_pixel_metrics = true;
        rep.auroc_loc = pm->auroc_loc;
        rep.ap_loc = pm->ap_loc;
        rep.n_pixels = pm->n_pixels;
        rep.n_anomalous_pixels = pm->n_anomalous_pixels;
    }
    return rep;
}

} // namespace sgsf
