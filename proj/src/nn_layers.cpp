#include "sgsf/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "sgsf/kernels.hpp"

namespace sgsf::nn {
namespace {

void im2col(const double* x, int ic, int h, int w, int k, int stride, int pad, int oh, int ow,
            double* col) {
    // col is (ic*k*k) x (oh*ow)
    const size_t ohw = static_cast<size_t>(oh) * ow;
    size_t row = 0;
    for (int ci = 0; ci < ic; ++ci) {
        const double* plane = x + static_cast<size_t>(ci) * h * w;
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx, ++row) {
                double* out = col + row * ohw;
                size_t idx = 0;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) {
                        for (int ox = 0; ox < ow; ++ox) out[idx++] = 0.0;
                        continue;
                    }
                    const double* src = plane + static_cast<size_t>(iy) * w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        out[idx++] = (ix < 0 || ix >= w) ? 0.0 : src[ix];
                    }
                }
            }
    }
}

void col2im(const double* col, int ic, int h, int w, int k, int stride, int pad, int oh, int ow,
            double* x) {
    const size_t ohw = static_cast<size_t>(oh) * ow;
    size_t row = 0;
    for (int ci = 0; ci < ic; ++ci) {
        double* plane = x + static_cast<size_t>(ci) * h * w;
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx, ++row) {
                const double* src = col + row * ohw;
                size_t idx = 0;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) {
                        idx += ow;
                        continue;
                    }
                    double* dst = plane + static_cast<size_t>(iy) * w;
                    for (int ox = 0; ox < ow; ++ox, ++idx) {
                        const int ix = ox * stride + kx - pad;
                        if (ix >= 0 && ix < w) dst[ix] += src[idx];
                    }
                }
            }
    }
}

} // namespace

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad)
    : ic_(in_ch), oc_(out_ch), k_(kernel), stride_(stride), pad_(pad) {
    const size_t wsize = static_cast<size_t>(oc_) * ic_ * k_ * k_;
    w.assign(wsize, 0.0);
    dw.assign(wsize, 0.0);
    b.assign(oc_, 0.0);
    db.assign(oc_, 0.0);
}

void Conv2d::init(Rng& rng) {
    const double fan_in = static_cast<double>(ic_) * k_ * k_;
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& x : w) x = rng.uniform(-bound, bound);
    std::fill(b.begin(), b.end(), 0.0);
}

Tensor Conv2d::forward(const Tensor& x) {
    if (x.c != ic_) throw std::logic_error("conv: channel mismatch");
    x_ = x;
    const int oh = out_side(x.h);
    const int ow = out_side(x.w);
    const int krows = ic_ * k_ * k_;
    const size_t ohw = static_cast<size_t>(oh) * ow;
    col_.resize(static_cast<size_t>(krows) * ohw);

    Tensor y(x.n, oc_, oh, ow);
    const auto& kt = kernels::active();
    for (int i = 0; i < x.n; ++i) {
        im2col(x.sample(i), ic_, x.h, x.w, k_, stride_, pad_, oh, ow, col_.data());
        double* ys = y.sample(i);
        kt.gemm_nn(w.data(), col_.data(), ys, oc_, static_cast<int>(ohw), krows, false);
        for (int o = 0; o < oc_; ++o) {
            double* row = ys + static_cast<size_t>(o) * ohw;
            const double bias = b[o];
            for (size_t j = 0; j < ohw; ++j) row[j] += bias;
        }
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    const int oh = dy.h, ow = dy.w;
    const int krows = ic_ * k_ * k_;
    const size_t ohw = static_cast<size_t>(oh) * ow;
    col_.resize(static_cast<size_t>(krows) * ohw);
    dcol_.resize(col_.size());

    Tensor dx(x_.n, ic_, x_.h, x_.w);
    const auto& kt = kernels::active();
    for (int i = 0; i < x_.n; ++i) {
        const double* dys = dy.sample(i);

        // dW += dY * col^T, db += row sums
        im2col(x_.sample(i), ic_, x_.h, x_.w, k_, stride_, pad_, oh, ow, col_.data());
        kt.gemm_nt(dys, col_.data(), dw.data(), oc_, krows, static_cast<int>(ohw), true);
        for (int o = 0; o < oc_; ++o)
            db[o] += kt.reduce_sum(dys + static_cast<size_t>(o) * ohw, ohw);

        // dX = col2im(W^T * dY)
        kt.gemm_tn(w.data(), dys, dcol_.data(), krows, static_cast<int>(ohw), oc_, false);
        col2im(dcol_.data(), ic_, x_.h, x_.w, k_, stride_, pad_, oh, ow, dx.sample(i));
    }
    return dx;
}

void Conv2d::zero_grad() {
    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
}

std::vector<Param> Conv2d::params() {
    return {{w.data(), dw.data(), w.size()}, {b.data(), db.data(), b.size()}};
}

Tensor relu_fwd(const Tensor& x) {
    Tensor y(x.n, x.c, x.h, x.w);
    kernels::active().relu_fwd(x.v.data(), y.v.data(), x.size());
    return y;
}

Tensor relu_bwd(const Tensor& y, const Tensor& dy) {
    Tensor dx(y.n, y.c, y.h, y.w);
    kernels::active().relu_bwd(y.v.data(), dy.v.data(), dx.v.data(), y.size());
    return dx;
}

Tensor sigmoid_fwd(const Tensor& x) {
    Tensor y(x.n, x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i) y.v[i] = 1.0 / (1.0 + std::exp(-x.v[i]));
    return y;
}

Tensor sigmoid_bwd(const Tensor& y, const Tensor& dy) {
    Tensor dx(y.n, y.c, y.h, y.w);
    for (size_t i = 0; i < y.size(); ++i) dx.v[i] = dy.v[i] * y.v[i] * (1.0 - y.v[i]);
    return dx;
}

Tensor upsample2_fwd(const Tensor& x) {
    Tensor y(x.n, x.c, x.h * 2, x.w * 2);
    for (int i = 0; i < x.n; ++i)
        for (int ci = 0; ci < x.c; ++ci)
            for (int yy = 0; yy < x.h; ++yy)
                for (int xx = 0; xx < x.w; ++xx) {
                    const double v = x.at(i, ci, yy, xx);
                    y.at(i, ci, 2 * yy, 2 * xx) = v;
                    y.at(i, ci, 2 * yy, 2 * xx + 1) = v;
                    y.at(i, ci, 2 * yy + 1, 2 * xx) = v;
                    y.at(i, ci, 2 * yy + 1, 2 * xx + 1) = v;
                }
    return y;
}

Tensor upsample2_bwd(const Tensor& dy) {
    Tensor dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
    for (int i = 0; i < dy.n; ++i)
        for (int ci = 0; ci < dy.c; ++ci)
            for (int yy = 0; yy < dx.h; ++yy)
                for (int xx = 0; xx < dx.w; ++xx)
                    dx.at(i, ci, yy, xx) = dy.at(i, ci, 2 * yy, 2 * xx) +
                                           dy.at(i, ci, 2 * yy, 2 * xx + 1) +
                                           dy.at(i, ci, 2 * yy + 1, 2 * xx) +
                                           dy.at(i, ci, 2 * yy + 1, 2 * xx + 1);
    return dx;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n != b.n || a.h != b.h || a.w != b.w)
        throw std::logic_error("concat: spatial/batch shapes disagree");
    Tensor y(a.n, a.c + b.c, a.h, a.w);
    const size_t pa = a.sample_size();
    const size_t pb = b.sample_size();
    for (int i = 0; i < a.n; ++i) {
        std::copy_n(a.sample(i), pa, y.sample(i));
        std::copy_n(b.sample(i), pb, y.sample(i) + pa);
    }
    return y;
}

void split_channels(const Tensor& d, int c_front, Tensor& front, Tensor& back) {
    front = Tensor(d.n, c_front, d.h, d.w);
    back = Tensor(d.n, d.c - c_front, d.h, d.w);
    const size_t pf = front.sample_size();
    const size_t pb = back.sample_size();
    for (int i = 0; i < d.n; ++i) {
        std::copy_n(d.sample(i), pf, front.sample(i));
        std::copy_n(d.sample(i) + pf, pb, back.sample(i));
    }
}

void accumulate(Tensor& dst, const Tensor& src) {
    if (src.empty()) return;
    if (!dst.same_shape(src)) throw std::logic_error("accumulate: shape mismatch");
    kernels::active().axpy(1.0, src.v.data(), dst.v.data(), dst.size());
}

} // namespace sgsf::nn
