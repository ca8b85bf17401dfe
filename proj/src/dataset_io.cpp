#include "sgsf/dataset_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "sgsf/error.hpp"

namespace fs = std::filesystem;

namespace sgsf {
namespace {

bool is_raster(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".tif" ||
           ext == ".tiff";
}

std::vector<std::string> list_rasters(const fs::path& dir) {
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_raster(e.path())) out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

cv::Mat load_raw(const std::string& path, int channels) {
    cv::Mat m = cv::imread(path, channels == 1 ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR);
    if (m.empty()) throw RuntimeFailure("cannot decode image: " + path);
    return m;
}

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::lround(std::min(std::max(v, 0.0), 1.0) * 255.0));
}

std::string format_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

} // namespace

std::string DatasetIndex::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        h ^= 0xff;
        h *= 0x100000001b3ull;
    };
    feed(category);
    for (const auto& p : train_normals) feed(path_stem(p));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

std::string path_stem(const std::string& path) { return fs::path(path).stem().string(); }

DatasetIndex scan_dataset(const std::string& root, const std::string& category) {
    DatasetIndex idx;
    idx.category = category;
    const fs::path base = fs::path(root) / category;
    const fs::path train_good = base / "train" / "good";
    if (!fs::is_directory(train_good))
        throw ValidationError("dataset layout error: missing " + train_good.string());
    idx.train_normals = list_rasters(train_good);

    const fs::path test_dir = base / "test";
    if (fs::is_directory(test_dir)) {
        std::vector<std::string> defects;
        for (const auto& e : fs::directory_iterator(test_dir))
            if (e.is_directory()) defects.push_back(e.path().filename().string());
        std::sort(defects.begin(), defects.end());
        for (const auto& defect : defects) {
            for (const auto& img : list_rasters(test_dir / defect)) {
                TestItem item;
                item.image_path = img;
                item.stem = defect + "/" + path_stem(img);
                item.defect = defect;
                item.is_anomalous = defect != "good";
                if (item.is_anomalous) {
                    const fs::path mask =
                        base / "ground_truth" / defect / (path_stem(img) + "_mask.png");
                    if (fs::exists(mask)) {
                        item.mask_path = mask.string();
                        item.mask_available = true;
                    }
                }
                idx.test_items.push_back(std::move(item));
            }
        }
    }
    return idx;
}

std::vector<std::string> scan_textures(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ValidationError("texture directory does not exist: " + dir);
    return list_rasters(dir);
}

Image load_image(const std::string& path, int side, int channels) {
    cv::Mat m = load_raw(path, channels);
    if (m.rows != side || m.cols != side)
        cv::resize(m, m, cv::Size(side, side), 0, 0, cv::INTER_LINEAR);
    Image img(side, channels);
    const double scale = 1.0 / 255.0;
    if (channels == 1) {
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) img.at(0, y, x) = m.at<std::uint8_t>(y, x) * scale;
    } else {
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                const cv::Vec3b px = m.at<cv::Vec3b>(y, x);
                for (int c = 0; c < 3; ++c) img.at(c, y, x) = px[c] * scale;
            }
    }
    return img;
}

Grid load_mask(const std::string& path, int side) {
    cv::Mat m = load_raw(path, 1);
    if (m.rows != side || m.cols != side)
        cv::resize(m, m, cv::Size(side, side), 0, 0, cv::INTER_NEAREST);
    Grid g(side, side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) g.at(y, x) = m.at<std::uint8_t>(y, x) > 127 ? 1.0 : 0.0;
    return g;
}

void save_image_png(const Image& img, const std::string& path) {
    cv::Mat m;
    if (img.channels == 1) {
        m.create(img.side, img.side, CV_8UC1);
        for (int y = 0; y < img.side; ++y)
            for (int x = 0; x < img.side; ++x) m.at<std::uint8_t>(y, x) = quantize(img.at(0, y, x));
    } else {
        m.create(img.side, img.side, CV_8UC3);
        for (int y = 0; y < img.side; ++y)
            for (int x = 0; x < img.side; ++x) {
                cv::Vec3b px;
                for (int c = 0; c < 3; ++c) px[c] = quantize(img.at(c, y, x));
                m.at<cv::Vec3b>(y, x) = px;
            }
    }
    if (!cv::imwrite(path, m)) throw RuntimeFailure("cannot write image: " + path);
}

void save_mask_png(const Grid& mask, const std::string& path) {
    cv::Mat m(mask.h, mask.w, CV_8UC1);
    for (int y = 0; y < mask.h; ++y)
        for (int x = 0; x < mask.w; ++x)
            m.at<std::uint8_t>(y, x) = mask.at(y, x) > 0.5 ? 255 : 0;
    if (!cv::imwrite(path, m)) throw RuntimeFailure("cannot write mask: " + path);
}

void save_heatmap(const AnomalyMap& map, const std::string& base_path) {
    cv::Mat m(map.h, map.w, CV_8UC1);
    for (int y = 0; y < map.h; ++y)
        for (int x = 0; x < map.w; ++x) m.at<std::uint8_t>(y, x) = quantize(map.at(y, x));
    if (!cv::imwrite(base_path + ".png", m))
        throw RuntimeFailure("cannot write heatmap: " + base_path + ".png");

    std::ofstream out(base_path + ".f32", std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write heatmap sidecar: " + base_path + ".f32");
    const std::uint32_t hw[2] = {static_cast<std::uint32_t>(map.h),
                                 static_cast<std::uint32_t>(map.w)};
    out.write(reinterpret_cast<const char*>(hw), sizeof(hw));
    std::vector<float> row(map.w);
    for (int y = 0; y < map.h; ++y) {
        for (int x = 0; x < map.w; ++x) row[x] = static_cast<float>(map.at(y, x));
        out.write(reinterpret_cast<const char*>(row.data()), sizeof(float) * row.size());
    }
    if (!out) throw RuntimeFailure("short write on heatmap sidecar: " + base_path + ".f32");
}

std::vector<float> load_heatmap_sidecar(const std::string& path, int& h, int& w) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("cannot open heatmap sidecar: " + path);
    std::uint32_t hw[2];
    in.read(reinterpret_cast<char*>(hw), sizeof(hw));
    if (!in) throw RuntimeFailure("truncated heatmap sidecar: " + path);
    h = static_cast<int>(hw[0]);
    w = static_cast<int>(hw[1]);
    std::vector<float> data(static_cast<size_t>(h) * w);
    in.read(reinterpret_cast<char*>(data.data()), sizeof(float) * data.size());
    if (!in) throw RuntimeFailure("truncated heatmap sidecar: " + path);
    return data;
}

void write_report(const MetricsReport& r, const std::string& path) {
    std::ostringstream out;
    out << "category = " << r.category << "\n";
    out << "config_fingerprint = " << r.config_fingerprint << "\n";
    out << "auroc_det = " << format_double(r.auroc_det) << "\n";
    out << "f1 = " << format_double(r.f1) << "\n";
    out << "tpr = " << format_double(r.tpr) << "\n";
    out << "tnr = " << format_double(r.tnr) << "\n";
    out << "acc = " << format_double(r.acc) << "\n";
    out << "macc = " << format_double(r.macc) << "\n";
    out << "threshold = " << format_double(r.threshold) << "\n";
    out << "has_pixel_metrics = " << (r.has_pixel_metrics ? 1 : 0) << "\n";
    if (r.has_pixel_metrics) {
        out << "auroc_loc = " << format_double(r.auroc_loc) << "\n";
        out << "ap_loc = " << format_double(r.ap_loc) << "\n";
    }
    out << "n_test = " << r.n_test << "\n";
    out << "n_anomalous = " << r.n_anomalous << "\n";
    out << "n_normal = " << r.n_normal << "\n";
    out << "n_pixels = " << r.n_pixels << "\n";
    out << "n_anomalous_pixels = " << r.n_anomalous_pixels << "\n";

    std::ofstream f(path);
    if (!f) throw RuntimeFailure("cannot write report: " + path);
    f << out.str();
    if (!f) throw RuntimeFailure("short write on report: " + path);
}

MetricsReport parse_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeFailure("cannot open report: " + path);
    MetricsReport r;
    std::string line;
    while (std::getline(in, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        };
        strip(key);
        strip(val);
        if (key == "category") r.category = val;
        else if (key == "config_fingerprint") r.config_fingerprint = val;
        else if (key == "auroc_det") r.auroc_det = std::stod(val);
        else if (key == "f1") r.f1 = std::stod(val);
        else if (key == "tpr") r.tpr = std::stod(val);
        else if (key == "tnr") r.tnr = std::stod(val);
        else if (key == "acc") r.acc = std::stod(val);
        else if (key == "macc") r.macc = std::stod(val);
        else if (key == "threshold") r.threshold = std::stod(val);
        else if (key == "has_pixel_metrics") r.has_pixel_metrics = val == "1";
        else if (key == "auroc_loc") r.auroc_loc = std::stod(val);
        else if (key == "ap_loc") r.ap_loc = std::stod(val);
        else if (key == "n_test") r.n_test = std::stoi(val);
        else if (key == "n_anomalous") r.n_anomalous = std::stoi(val);
        else if (key == "n_normal") r.n_normal = std::stoi(val);
        else if (key == "n_pixels") r.n_pixels = std::stoull(val);
        else if (key == "n_anomalous_pixels") r.n_anomalous_pixels = std::stoull(val);
    }
    return r;
}

} // namespace sgsf
