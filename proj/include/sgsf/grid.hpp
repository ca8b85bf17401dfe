#pragma once

#include <algorithm>
#include <cassert>
#include <vector>

namespace sgsf {

// Dense row-major H x W double plane. The unit for every per-pixel map in
// the toolchain: saliency maps, noise fields, binary masks, label maps and
// anomaly maps are all Grids with extra value conventions.
struct Grid {
    int h = 0;
    int w = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int h_, int w_, double fill = 0.0) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, fill) {}

    double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
    double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }

    size_t size() const { return v.size(); }

    double min() const { return *std::min_element(v.begin(), v.end()); }
    double max() const { return *std::max_element(v.begin(), v.end()); }

    double sum() const {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }

    bool same_shape(const Grid& o) const { return h == o.h && w == o.w; }
};

// Per-pixel value conventions, all square N x N in practice:
//   SaliencyMap  — floats in [0,1]
//   NoiseField   — floats normalized to [0,1]
//   BinaryMask   — exactly 0.0 or 1.0
//   PixelLabels  — exactly 0.0 (normal) or 1.0 (anomalous)
//   AnomalyMap   — per-pixel anomaly probability in [0,1]
using SaliencyMap = Grid;
using NoiseField = Grid;
using BinaryMask = Grid;
using PixelLabels = Grid;
using AnomalyMap = Grid;

inline bool is_binary(const Grid& g) {
    for (double x : g.v)
        if (x != 0.0 && x != 1.0) return false;
    return true;
}

// Min-max rescale to [0,1] in place. A constant field maps to all 0.5 so the
// result is always well defined.
inline void normalize_minmax(Grid& g) {
    const double lo = g.min();
    const double hi = g.max();
    if (hi == lo) {
        std::fill(g.v.begin(), g.v.end(), 0.5);
        return;
    }
    const double scale = 1.0 / (hi - lo);
    for (double& x : g.v) x = (x - lo) * scale;
}

} // namespace sgsf
