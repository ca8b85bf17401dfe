#pragma once

#include <cassert>
#include <vector>

#include "sgsf/grid.hpp"

namespace sgsf {

// Square float image in [0,1], planar channel layout [c][y][x].
// 1 or 3 channels; channel order is as loaded from disk.
struct Image {
    int side = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int side_, int channels_, double fill = 0.0)
        : side(side_), channels(channels_),
          data(static_cast<size_t>(side_) * side_ * channels_, fill) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * side + y) * side + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * side + y) * side + x];
    }

    size_t plane_size() const { return static_cast<size_t>(side) * side; }

    const double* plane(int c) const { return data.data() + c * plane_size(); }
    double* plane(int c) { return data.data() + c * plane_size(); }

    bool same_shape(const Image& o) const { return side == o.side && channels == o.channels; }

    // Channel mean as a single plane.
    Grid to_gray() const {
        Grid g(side, side);
        const double inv = 1.0 / channels;
        for (int c = 0; c < channels; ++c) {
            const double* p = plane(c);
            for (size_t i = 0; i < g.size(); ++i) g.v[i] += p[i] * inv;
        }
        return g;
    }
};

} // namespace sgsf
