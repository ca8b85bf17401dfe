#include "sgsf/forge.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "sgsf/error.hpp"
#include "sgsf/instrument.hpp"
#include "sgsf/perlin.hpp"

namespace sgsf::forge {
namespace {

constexpr int kMaxMaskAttempts = 10;
constexpr double kFullMaskFraction = 0.9;

inline double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void op_brightness(Image& img, Rng& rng) {
    const double f = rng.uniform(0.5, 1.5);
    for (double& v : img.data) v = clip01(v * f);
}

void op_contrast(Image& img, Rng& rng) {
    const double f = rng.uniform(0.5, 1.5);
    for (int c = 0; c < img.channels; ++c) {
        double* p = img.plane(c);
        const size_t n = img.plane_size();
        double mean = 0.0;
        for (size_t i = 0; i < n; ++i) mean += p[i];
        mean /= static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) p[i] = clip01(mean + (p[i] - mean) * f);
    }
}

void op_channel_permutation(Image& img, Rng& rng) {
    if (img.channels < 2) return;
    std::array<int, 3> perm = {0, 1, 2};
    for (int i = 2; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    const Image src = img;
    for (int c = 0; c < img.channels; ++c)
        std::copy_n(src.plane(perm[c]), src.plane_size(), img.plane(c));
}

void op_rotate(Image& img, Rng& rng) {
    const int quarter_turns = 1 + rng.uniform_int(3);
    const int n = img.side;
    for (int t = 0; t < quarter_turns; ++t) {
        const Image src = img;
        for (int c = 0; c < img.channels; ++c)
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) img.at(c, y, x) = src.at(c, n - 1 - x, y);
    }
}

void op_flip(Image& img, Rng& rng) {
    const bool horizontal = rng.uniform_int(2) == 0;
    const int n = img.side;
    const Image src = img;
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                img.at(c, y, x) = horizontal ? src.at(c, y, n - 1 - x) : src.at(c, n - 1 - y, x);
}

void op_solarize(Image& img, Rng&) {
    for (double& v : img.data)
        if (v > 0.5) v = 1.0 - v;
}

void op_posterize(Image& img, Rng&) {
    for (double& v : img.data) v = clip01(std::floor(v * 16.0) / 16.0);
}

using AugmentOp = void (*)(Image&, Rng&);
constexpr std::array<AugmentOp, 7> kAugmentOps = {
    op_brightness, op_contrast, op_channel_permutation, op_rotate,
    op_flip,       op_solarize, op_posterize,
};

} // namespace

double adaptive_threshold(const SaliencyMap& s, double a, double b) {
    if (a < 0.0 || b < 0.0 || a + b > 1.0)
        throw ValidationError("adaptive threshold: need a >= 0, b >= 0, a+b <= 1");
    const double area = static_cast<double>(s.h) * s.w;
    return a + (s.sum() / area) * b;
}

std::optional<BinaryMask> make_mask(const NoiseField& g, double mu) {
    if (mu < 0.0 || mu > 1.0) throw ValidationError("mask threshold must lie in [0,1]");
    BinaryMask m(g.h, g.w);
    size_t ones = 0;
    for (size_t i = 0; i < g.size(); ++i) {
        const bool on = g.v[i] > mu;
        m.v[i] = on ? 1.0 : 0.0;
        ones += on;
    }
    if (ones == 0) return std::nullopt;
    if (static_cast<double>(ones) > kFullMaskFraction * static_cast<double>(g.size()))
        return std::nullopt;
    return m;
}

Image augment_auxiliary(const Image& b, Rng& rng) {
    std::array<int, 7> order = {0, 1, 2, 3, 4, 5, 6};
    for (int i = 0; i < 3; ++i) {
        const int j = i + rng.uniform_int(static_cast<int>(order.size()) - i);
        std::swap(order[i], order[j]);
    }
    Image out = b;
    for (int i = 0; i < 3; ++i) kAugmentOps[order[i]](out, rng);
    return out;
}

ForgedSample compose(const Image& a, const Image& b, const BinaryMask& m, double alpha) {
    if (!a.same_shape(b) || m.h != a.side || m.w != a.side)
        throw ValidationError("compose: image/mask shapes disagree");
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("compose: alpha must lie in [0,1]");
    instrument::composites++;

    ForgedSample out;
    out.image = Image(a.side, a.channels);
    out.alpha = alpha;
    const size_t plane = a.plane_size();
    for (int c = 0; c < a.channels; ++c) {
        const double* pa = a.plane(c);
        const double* pb = b.plane(c);
        double* po = out.image.plane(c);
        for (size_t i = 0; i < plane; ++i) {
            const double mk = m.v[i];
            po[i] = pa[i] * (1.0 - mk) + alpha * (pb[i] * mk) + (1.0 - alpha) * (pa[i] * mk);
        }
    }

    // y_I = M . y_B + (1-M) . y_A with the all-normal source (y_A = 0) and
    // all-anomalous auxiliary (y_B = 1).
    constexpr double y_a = 0.0;
    constexpr double y_b = 1.0;
    out.label = PixelLabels(a.side, a.side);
    for (size_t i = 0; i < out.label.size(); ++i)
        out.label.v[i] = m.v[i] * y_b + (1.0 - m.v[i]) * y_a;
    out.mask = m;
    return out;
}

std::optional<ForgedSample> forge_sample(const Image& a, const SaliencyMap& s,
                                         const std::vector<Image>& aux_pool,
                                         const RunConfig& cfg, Rng& rng,
                                         const std::string& source_stem) {
    if (aux_pool.empty()) throw ValidationError("forge: auxiliary image pool is empty");
    const double mu = adaptive_threshold(s, cfg.a, cfg.b);

    std::optional<BinaryMask> mask;
    for (int attempt = 0; attempt < kMaxMaskAttempts && !mask; ++attempt)
        mask = make_mask(perlin::spng(s, a.side, rng), mu);
    if (!mask) return std::nullopt;
    instrument::forged_samples++;

    const Image& b_raw = aux_pool[rng.uniform_int(static_cast<int>(aux_pool.size()))];
    const Image b = augment_auxiliary(b_raw, rng);
    const double alpha = rng.uniform(cfg.alpha_lo, cfg.alpha_hi);
    ForgedSample sample = compose(a, b, *mask, alpha);
    sample.source_stem = source_stem;
    return sample;
}

std::vector<MixedSample> mix_batch(const std::vector<const Image*>& normals,
                                   const std::vector<const SaliencyMap*>& saliencies,
                                   const std::vector<std::string>& stems,
                                   const std::vector<Image>& aux_pool, const RunConfig& cfg,
                                   Rng& rng) {
    std::vector<MixedSample> out;
    out.reserve(normals.size());
    const double p_forged = cfg.forged_ratio / (cfg.forged_ratio + 1.0);
    for (size_t i = 0; i < normals.size(); ++i) {
        const Image& img = *normals[i];
        const std::string stem = i < stems.size() ? stems[i] : "";
        MixedSample slot;
        slot.source_stem = stem;
        if (rng.uniform() < p_forged) {
            auto forged = forge_sample(img, *saliencies[i], aux_pool, cfg, rng, stem);
            if (forged) {
                slot.image = std::move(forged->image);
                slot.label = std::move(forged->label);
                slot.is_forged = true;
                out.push_back(std::move(slot));
                continue;
            }
        }
        slot.image = img;
        slot.label = PixelLabels(img.side, img.side, 0.0);
        slot.is_forged = false;
        out.push_back(std::move(slot));
    }
    return out;
}

} // namespace sgsf::forge
