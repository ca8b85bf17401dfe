#include "sgsf/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "sgsf/error.hpp"

namespace sgsf::saliency {
namespace {

// Box mean with replicate borders, via running row/column sums.
Grid mean_filter(const Grid& in, int k) {
    const int r = k / 2;
    const int h = in.h, w = in.w;
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

    Grid tmp(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int t = -r; t <= r; ++t) s += in.at(y, clampi(x + t, w - 1));
            tmp.at(y, x) = s;
        }
    Grid out(h, w);
    const double inv = 1.0 / (static_cast<double>(k) * k);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int t = -r; t <= r; ++t) s += tmp.at(clampi(y + t, h - 1), x);
            out.at(y, x) = s * inv;
        }
    return out;
}

} // namespace

std::optional<SaliencyMap> try_load_saliency(const std::string& dir, const std::string& stem,
                                             int side) {
    const std::filesystem::path p = std::filesystem::path(dir) / (stem + ".png");
    if (!std::filesystem::exists(p)) return std::nullopt;
    cv::Mat m = cv::imread(p.string(), cv::IMREAD_GRAYSCALE);
    if (m.empty()) throw RuntimeFailure("cannot decode saliency map: " + p.string());
    if (m.rows != side || m.cols != side)
        cv::resize(m, m, cv::Size(side, side), 0, 0, cv::INTER_NEAREST);
    SaliencyMap s(side, side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) s.at(y, x) = m.at<std::uint8_t>(y, x) / 255.0;
    return s;
}

SaliencyMap heuristic_saliency(const Image& img) {
    Grid gray = img.to_gray();

    std::vector<double> sorted(gray.v);
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];

    Grid diff(gray.h, gray.w);
    for (size_t i = 0; i < gray.size(); ++i) diff.v[i] = std::abs(gray.v[i] - median);

    const double hi = diff.max();
    const double lo = diff.min();
    if (hi == lo) return Grid(gray.h, gray.w, 0.0); // zero-contrast image
    const double scale = 1.0 / (hi - lo);
    for (double& v : diff.v) v = (v - lo) * scale;

    // Textureless gate on the normalized (pre-smoothing) map.
    std::vector<double> ranked(diff.v);
    const size_t q = static_cast<size_t>(std::ceil(0.9 * ranked.size())) - 1;
    std::nth_element(ranked.begin(), ranked.begin() + q, ranked.end());
    if (ranked[q] < 0.1) return Grid(gray.h, gray.w, 0.0);

    return mean_filter(diff, 11);
}

bool is_textureless(const SaliencyMap& s) { return s.sum() == 0.0; }

SaliencyMap SaliencyProvider::get(const Image& img, const std::string& stem) const {
    if (!dir_.empty()) {
        auto loaded = try_load_saliency(dir_, stem, img.side);
        if (loaded.has_value()) return std::move(*loaded);
        std::cerr << "[sgsf] warning: no saliency map for '" << stem << "' in " << dir_
                  << ", using heuristic\n";
    }
    return heuristic_saliency(img);
}

} // namespace sgsf::saliency
