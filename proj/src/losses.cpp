#include "sgsf/losses.hpp"

#include <cmath>
#include <vector>

#include "sgsf/error.hpp"
#include "sgsf/kernels.hpp"

namespace sgsf::losses {
namespace {

constexpr double kC1 = 0.01 * 0.01; // (0.01 * L)^2 at L = 1
constexpr double kC2 = 0.03 * 0.03;
constexpr double kProbEps = 1e-7;

std::vector<double> gaussian_kernel(int k, double sigma) {
    std::vector<double> g(k);
    const int r = k / 2;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        const double d = i - r;
        g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
}

inline int clampi(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

// Separable correlation with replicate borders, float plane of size h*w.
void filt2(const std::vector<double>& g, const double* in, double* out, double* tmp, int h,
           int w) {
    const int r = static_cast<int>(g.size()) / 2;
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<size_t>(y) * w;
        double* trow = tmp + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int t = -r; t <= r; ++t) s += g[t + r] * row[clampi(x + t, w - 1)];
            trow[x] = s;
        }
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int t = -r; t <= r; ++t)
                s += g[t + r] * tmp[static_cast<size_t>(clampi(y + t, h - 1)) * w + x];
            out[static_cast<size_t>(y) * w + x] = s;
        }
}

// Adjoint of filt2 (scatter with the same border clamping, passes applied in
// reverse order).
void filt2_adj(const std::vector<double>& g, const double* in, double* out, double* tmp, int h,
               int w) {
    const int r = static_cast<int>(g.size()) / 2;
    std::fill(tmp, tmp + static_cast<size_t>(h) * w, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v = in[static_cast<size_t>(y) * w + x];
            for (int t = -r; t <= r; ++t)
                tmp[static_cast<size_t>(clampi(y + t, h - 1)) * w + x] += g[t + r] * v;
        }
    std::fill(out, out + static_cast<size_t>(h) * w, 0.0);
    for (int y = 0; y < h; ++y) {
        const double* trow = tmp + static_cast<size_t>(y) * w;
        double* orow = out + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const double v = trow[x];
            for (int t = -r; t <= r; ++t) orow[clampi(x + t, w - 1)] += g[t + r] * v;
        }
    }
}

struct SsimPlanes {
    std::vector<double> mu_x, mu_y, sxx, syy, sxy;
};

void check_shapes(const nn::Tensor& a, const nn::Tensor& b) {
    if (!a.same_shape(b)) throw ValidationError("loss: tensor shapes disagree");
}

} // namespace

double l2_loss(const nn::Tensor& target, const nn::Tensor& recon) {
    check_shapes(target, recon);
    return kernels::active().sq_diff_sum(target.v.data(), recon.v.data(), target.size()) /
           static_cast<double>(target.size());
}

double l2_loss_grad(const nn::Tensor& target, const nn::Tensor& recon, nn::Tensor& d_recon) {
    check_shapes(target, recon);
    d_recon = nn::Tensor(recon.n, recon.c, recon.h, recon.w);
    const double inv = 2.0 / static_cast<double>(recon.size());
    for (size_t i = 0; i < recon.size(); ++i) d_recon.v[i] = inv * (recon.v[i] - target.v[i]);
    return l2_loss(target, recon);
}

namespace {

double ssim_impl(const nn::Tensor& target, const nn::Tensor& recon, int window,
                 nn::Tensor* d_recon) {
    check_shapes(target, recon);
    if (window < 1 || window % 2 == 0) throw ValidationError("ssim window must be odd and >= 1");
    if (window > target.h || window > target.w)
        throw ValidationError("ssim window exceeds image side");

    const auto g = gaussian_kernel(window, 1.5);
    const int h = target.h, w = target.w;
    const size_t plane = static_cast<size_t>(h) * w;
    const double inv_count = 1.0 / static_cast<double>(target.size());

    std::vector<double> tmp(plane), buf(plane);
    SsimPlanes s;
    s.mu_x.resize(plane);
    s.mu_y.resize(plane);
    s.sxx.resize(plane);
    s.syy.resize(plane);
    s.sxy.resize(plane);
    std::vector<double> g_mu(plane), g_syy(plane), g_sxy(plane), adj(plane);

    if (d_recon) *d_recon = nn::Tensor(recon.n, recon.c, recon.h, recon.w);

    double loss = 0.0;
    for (int i = 0; i < target.n; ++i)
        for (int ci = 0; ci < target.c; ++ci) {
            const double* x = target.sample(i) + static_cast<size_t>(ci) * plane;
            const double* y = recon.sample(i) + static_cast<size_t>(ci) * plane;

            filt2(g, x, s.mu_x.data(), tmp.data(), h, w);
            filt2(g, y, s.mu_y.data(), tmp.data(), h, w);
            for (size_t p = 0; p < plane; ++p) buf[p] = x[p] * x[p];
            filt2(g, buf.data(), s.sxx.data(), tmp.data(), h, w);
            for (size_t p = 0; p < plane; ++p) buf[p] = y[p] * y[p];
            filt2(g, buf.data(), s.syy.data(), tmp.data(), h, w);
            for (size_t p = 0; p < plane; ++p) buf[p] = x[p] * y[p];
            filt2(g, buf.data(), s.sxy.data(), tmp.data(), h, w);

            for (size_t p = 0; p < plane; ++p) {
                const double mx = s.mu_x[p], my = s.mu_y[p];
                const double vx = s.sxx[p] - mx * mx;
                const double vy = s.syy[p] - my * my;
                const double cxy = s.sxy[p] - mx * my;
                const double a1 = 2.0 * mx * my + kC1;
                const double a2 = 2.0 * cxy + kC2;
                const double b1 = mx * mx + my * my + kC1;
                const double b2 = vx + vy + kC2;
                const double ssim = (a1 * a2) / (b1 * b2);
                loss += (1.0 - ssim) * inv_count;

                if (d_recon) {
                    const double gs = -inv_count; // dLoss/dSSIM at this pixel
                    const double inv_b1b2 = 1.0 / (b1 * b2);
                    const double ga1 = gs * a2 * inv_b1b2;
                    const double ga2 = gs * a1 * inv_b1b2;
                    const double gb1 = -gs * ssim / b1;
                    const double gb2 = -gs * ssim / b2;
                    // mu_y enters a1, b1 and (through the central moments)
                    // cxy and vy.
                    g_mu[p] = ga1 * 2.0 * mx + gb1 * 2.0 * my + ga2 * 2.0 * (-mx) +
                              gb2 * (-2.0 * my);
                    g_syy[p] = gb2;
                    g_sxy[p] = ga2 * 2.0;
                }
            }

            if (d_recon) {
                double* dst = d_recon->sample(i) + static_cast<size_t>(ci) * plane;
                filt2_adj(g, g_mu.data(), adj.data(), tmp.data(), h, w);
                for (size_t p = 0; p < plane; ++p) dst[p] += adj[p];
                filt2_adj(g, g_syy.data(), adj.data(), tmp.data(), h, w);
                for (size_t p = 0; p < plane; ++p) dst[p] += 2.0 * y[p] * adj[p];
                filt2_adj(g, g_sxy.data(), adj.data(), tmp.data(), h, w);
                for (size_t p = 0; p < plane; ++p) dst[p] += x[p] * adj[p];
            }
        }
    return loss;
}

} // namespace

double ssim_loss(const nn::Tensor& target, const nn::Tensor& recon, int window) {
    return ssim_impl(target, recon, window, nullptr);
}

double ssim_loss_grad(const nn::Tensor& target, const nn::Tensor& recon, int window,
                      nn::Tensor& d_recon) {
    return ssim_impl(target, recon, window, &d_recon);
}

double self_loss(const nn::Tensor& target, const nn::Tensor& recon, int window) {
    return l2_loss(target, recon) + ssim_loss(target, recon, window);
}

namespace {

double focal_impl(const nn::Tensor& out, const nn::Tensor& labels, double tau,
                  nn::Tensor* d_out) {
    check_shapes(out, labels);
    if (tau < 0.0) throw ValidationError("focal loss: tau must be >= 0");
    const double inv = 1.0 / static_cast<double>(out.size());
    if (d_out) *d_out = nn::Tensor(out.n, out.c, out.h, out.w);
    double loss = 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
        const double raw = out.v[i];
        const double p = std::min(std::max(raw, kProbEps), 1.0 - kProbEps);
        const bool clamped = p != raw;
        double l, dl;
        if (labels.v[i] == 1.0) {
            const double q = 1.0 - p;
            const double qt = tau == 0.0 ? 1.0 : std::pow(q, tau);
            l = -qt * std::log(p);
            dl = tau == 0.0 ? -1.0 / p
                            : tau * std::pow(q, tau - 1.0) * std::log(p) - qt / p;
        } else {
            const double pt = tau == 0.0 ? 1.0 : std::pow(p, tau);
            l = -pt * std::log(1.0 - p);
            dl = tau == 0.0 ? 1.0 / (1.0 - p)
                            : -tau * std::pow(p, tau - 1.0) * std::log(1.0 - p) + pt / (1.0 - p);
        }
        loss += l * inv;
        if (d_out) d_out->v[i] = clamped ? 0.0 : dl * inv;
    }
    return loss;
}

} // namespace

double focal_loss(const nn::Tensor& out, const nn::Tensor& labels, double tau) {
    return focal_impl(out, labels, tau, nullptr);
}

double focal_loss_grad(const nn::Tensor& out, const nn::Tensor& labels, double tau,
                       nn::Tensor& d_out) {
    return focal_impl(out, labels, tau, &d_out);
}

LossValue combine(double l2, double ssim, double focal, double lambda) {
    LossValue v;
    v.l2 = l2;
    v.ssim = ssim;
    v.focal = focal;
    v.total = lambda * (l2 + ssim) + focal;
    return v;
}

double total_loss(double self_component, double focal_component, double lambda) {
    return lambda * self_component + focal_component;
}

double l2_loss(const Image& target, const Image& recon) {
    return l2_loss(nn::from_image(target), nn::from_image(recon));
}

double ssim_loss(const Image& target, const Image& recon, int window) {
    return ssim_loss(nn::from_image(target), nn::from_image(recon), window);
}

double self_loss(const Image& target, const Image& recon, int window) {
    return self_loss(nn::from_image(target), nn::from_image(recon), window);
}

double focal_loss(const AnomalyMap& out, const PixelLabels& labels, double tau) {
    return focal_loss(nn::from_grids({&out}), nn::from_grids({&labels}), tau);
}

} // namespace sgsf::losses
