#pragma once

#include <string>
#include <vector>

#include "sgsf/config.hpp"
#include "sgsf/grid.hpp"
#include "sgsf/image.hpp"
#include "sgsf/metrics.hpp"

namespace sgsf {

struct TestItem {
    std::string image_path;
    std::string mask_path; // empty when unavailable
    std::string stem;
    std::string defect; // "good" for normal test items
    bool is_anomalous = false;
    bool mask_available = false;
};

struct DatasetIndex {
    std::string category;
    std::vector<std::string> train_normals;
    std::vector<TestItem> test_items;
    std::vector<std::string> aux_textures;

    // Stable hash over the sorted train stems; contrast indices record it.
    std::string fingerprint() const;
};

// Layout: <root>/<category>/train/good/*, <root>/<category>/test/<defect>/*,
// <root>/<category>/ground_truth/<defect>/<stem>_mask.png. Ordering is
// sorted, so two scans of the same tree are identical. An anomalous test
// image without a mask is kept and marked mask-unavailable.
DatasetIndex scan_dataset(const std::string& root, const std::string& category);

// Sorted raster files of a flat directory (auxiliary texture pool).
std::vector<std::string> scan_textures(const std::string& dir);

std::string path_stem(const std::string& path);

// Decode, bilinear-resize to side x side, scale to [0,1], coerce channels.
Image load_image(const std::string& path, int side, int channels);

// Grayscale load, nearest-neighbour resize (preserves binarity), then > 1/2
// binarization.
Grid load_mask(const std::string& path, int side);

// 8-bit output, value = round(255 * v) with round-half-up.
void save_image_png(const Image& img, const std::string& path);
void save_mask_png(const Grid& mask, const std::string& path);

// Writes <base>.png (8-bit grayscale) and <base>.f32 (two little-endian
// uint32 H,W then row-major float32) for exact round-trips.
void save_heatmap(const AnomalyMap& map, const std::string& base_path);
std::vector<float> load_heatmap_sidecar(const std::string& path, int& h, int& w);

void write_report(const MetricsReport& report, const std::string& path);
MetricsReport parse_report(const std::string& path);

} // namespace sgsf
