#pragma once

#include <cassert>
#include <cstring>
#include <vector>

#include "sgsf/grid.hpp"
#include "sgsf/image.hpp"

namespace sgsf::nn {

// Dense NCHW activation/parameter tensor, double precision throughout so
// finite-difference checks are meaningful.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_) * c_ * h_ * w_, 0.0) {}

    size_t size() const { return v.size(); }
    size_t sample_size() const { return static_cast<size_t>(c) * h * w; }
    size_t plane_size() const { return static_cast<size_t>(h) * w; }

    double* sample(int i) { return v.data() + static_cast<size_t>(i) * sample_size(); }
    const double* sample(int i) const { return v.data() + static_cast<size_t>(i) * sample_size(); }

    double& at(int i, int ci, int y, int x) {
        return v[((static_cast<size_t>(i) * c + ci) * h + y) * w + x];
    }
    double at(int i, int ci, int y, int x) const {
        return v[((static_cast<size_t>(i) * c + ci) * h + y) * w + x];
    }

    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }
    bool empty() const { return v.empty(); }
    void zero() { std::memset(v.data(), 0, v.size() * sizeof(double)); }
};

inline Tensor from_image(const Image& img) {
    Tensor t(1, img.channels, img.side, img.side);
    std::copy(img.data.begin(), img.data.end(), t.v.begin());
    return t;
}

inline Tensor from_images(const std::vector<const Image*>& imgs) {
    assert(!imgs.empty());
    Tensor t(static_cast<int>(imgs.size()), imgs[0]->channels, imgs[0]->side, imgs[0]->side);
    for (size_t i = 0; i < imgs.size(); ++i) {
        assert(imgs[i]->same_shape(*imgs[0]));
        std::copy(imgs[i]->data.begin(), imgs[i]->data.end(), t.v.begin() + i * t.sample_size());
    }
    return t;
}

inline Tensor from_grids(const std::vector<const Grid*>& grids) {
    assert(!grids.empty());
    Tensor t(static_cast<int>(grids.size()), 1, grids[0]->h, grids[0]->w);
    for (size_t i = 0; i < grids.size(); ++i)
        std::copy(grids[i]->v.begin(), grids[i]->v.end(), t.v.begin() + i * t.sample_size());
    return t;
}

inline Image to_image(const Tensor& t, int sample) {
    assert(t.h == t.w);
    Image img(t.h, t.c);
    std::copy_n(t.sample(sample), t.sample_size(), img.data.begin());
    return img;
}

inline Grid to_grid(const Tensor& t, int sample, int channel = 0) {
    Grid g(t.h, t.w);
    const double* p = t.sample(sample) + static_cast<size_t>(channel) * t.plane_size();
    std::copy_n(p, g.size(), g.v.begin());
    return g;
}

} // namespace sgsf::nn
