#include "sgsf/perlin.hpp"

#include <cmath>

#include "sgsf/error.hpp"
#include "sgsf/instrument.hpp"

namespace sgsf::perlin {
namespace {

inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

// Bilinear sample with pixel centers at integer coordinates, clamped.
double sample_bilinear(const Grid& g, double y, double x) {
    const auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    const int x0 = clampi(static_cast<int>(std::floor(x)), g.w - 1);
    const int y0 = clampi(static_cast<int>(std::floor(y)), g.h - 1);
    const int x1 = clampi(x0 + 1, g.w - 1);
    const int y1 = clampi(y0 + 1, g.h - 1);
    const double tx = std::min(std::max(x - x0, 0.0), 1.0);
    const double ty = std::min(std::max(y - y0, 0.0), 1.0);
    const double top = lerp(g.at(y0, x0), g.at(y0, x1), tx);
    const double bot = lerp(g.at(y1, x0), g.at(y1, x1), tx);
    return lerp(top, bot, ty);
}

} // namespace

RandomGrid make_random_grid(int cells, Rng& rng) {
    if (cells < 1) throw ValidationError("random grid: cells must be >= 1");
    instrument::random_grids++;
    RandomGrid g;
    g.cells = cells;
    const size_t pts = static_cast<size_t>(cells + 1) * (cells + 1);
    g.gx.resize(pts);
    g.gy.resize(pts);
    for (size_t i = 0; i < pts; ++i) {
        const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        g.gx[i] = std::cos(theta);
        g.gy[i] = std::sin(theta);
    }
    return g;
}

Grid gradient_field(const RandomGrid& grid, int side) {
    if (side < grid.cells) throw ValidationError("noise: side must be >= lattice cells");
    Grid out(side, side);
    const double scale = static_cast<double>(grid.cells) / side;
    for (int y = 0; y < side; ++y) {
        const double v = y * scale;
        const int cy = static_cast<int>(v);
        const double ty = v - cy;
        const double fy = fade(ty);
        for (int x = 0; x < side; ++x) {
            const double u = x * scale;
            const int cx = static_cast<int>(u);
            const double tx = u - cx;
            const double n00 = grid.gx_at(cy, cx) * tx + grid.gy_at(cy, cx) * ty;
            const double n10 = grid.gx_at(cy, cx + 1) * (tx - 1.0) + grid.gy_at(cy, cx + 1) * ty;
            const double n01 = grid.gx_at(cy + 1, cx) * tx + grid.gy_at(cy + 1, cx) * (ty - 1.0);
            const double n11 =
                grid.gx_at(cy + 1, cx + 1) * (tx - 1.0) + grid.gy_at(cy + 1, cx + 1) * (ty - 1.0);
            const double fx = fade(tx);
            out.at(y, x) = lerp(lerp(n00, n10, fx), lerp(n01, n11, fx), fy);
        }
    }
    return out;
}

NoiseField perlin_noise(const RandomGrid& grid, int side) {
    instrument::noise_fields++;
    Grid field = gradient_field(grid, side);
    for (double& v : field.v) v = std::abs(v);
    normalize_minmax(field);
    return field;
}

RandomGrid saliency_gate(const RandomGrid& grid, const SaliencyMap& s) {
    if (s.h != s.w) throw ValidationError("saliency gate: map must be square");
    if (s.sum() == 0.0) {
        // Textureless input: gate with the all-ones map, i.e. keep the grid.
        instrument::textureless_fallbacks++;
        return grid;
    }
    RandomGrid out = grid;
    const int side = s.h;
    const double cell = static_cast<double>(side) / grid.cells;
    for (int i = 0; i <= grid.cells; ++i) {
        const double py = std::min(i * cell, static_cast<double>(side - 1));
        for (int j = 0; j <= grid.cells; ++j) {
            const double px = std::min(j * cell, static_cast<double>(side - 1));
            const double w = sample_bilinear(s, py, px);
            out.gx_at(i, j) *= w;
            out.gy_at(i, j) *= w;
        }
    }
    return out;
}

int sample_grid_cells(Rng& rng, int side) {
    static constexpr int choices[] = {2, 4, 8, 16, 32};
    int n = 0;
    for (int c : choices)
        if (c <= side) ++n;
    if (n == 0) throw ValidationError("noise: image side too small for any lattice");
    return choices[rng.uniform_int(n)];
}

NoiseField spng(const SaliencyMap& s, int side, int cells, Rng& rng) {
    if (s.h != side || s.w != side)
        throw ValidationError("spng: saliency map shape does not match image side");
    return perlin_noise(saliency_gate(make_random_grid(cells, rng), s), side);
}

NoiseField spng(const SaliencyMap& s, int side, Rng& rng) {
    return spng(s, side, sample_grid_cells(rng, side), rng);
}

} // namespace sgsf::perlin
