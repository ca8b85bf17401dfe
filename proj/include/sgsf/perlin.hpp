#pragma once

#include <vector>

#include "sgsf/grid.hpp"
#include "sgsf/rng.hpp"

namespace sgsf::perlin {

// Lattice of unit 2-D gradient vectors, (cells+1) points per side. The cell
// structure tiles the image: cell size = side / cells.
struct RandomGrid {
    int cells = 0;
    std::vector<double> gx; // (cells+1)^2, row-major
    std::vector<double> gy;

    double& gx_at(int i, int j) { return gx[static_cast<size_t>(i) * (cells + 1) + j]; }
    double gx_at(int i, int j) const { return gx[static_cast<size_t>(i) * (cells + 1) + j]; }
    double& gy_at(int i, int j) { return gy[static_cast<size_t>(i) * (cells + 1) + j]; }
    double gy_at(int i, int j) const { return gy[static_cast<size_t>(i) * (cells + 1) + j]; }
};

// Gradients drawn as unit vectors with angle uniform on [0, 2*pi).
RandomGrid make_random_grid(int cells, Rng& rng);

// Signed gradient noise: corner dot products blended with the quintic fade
// 6t^5 - 15t^4 + 10t^3. Exactly zero at lattice-point pixels and wherever
// all four surrounding gradients are zero vectors.
Grid gradient_field(const RandomGrid& grid, int side);

// Noise magnitude min-max normalized to [0,1]. The magnitude keeps gated
// background regions at exactly 0 after normalization, so any threshold
// above 0 excludes them. A constant field normalizes to all 0.5.
NoiseField perlin_noise(const RandomGrid& grid, int side);

// Scale each lattice gradient by the saliency value bilinearly sampled at
// its pixel position. A saliency map summing to exactly 0 gates nothing
// (all-ones fallback; counted in instrument::textureless_fallbacks).
RandomGrid saliency_gate(const RandomGrid& grid, const SaliencyMap& s);

// Cell count choices for mask diversity, restricted to values <= side.
int sample_grid_cells(Rng& rng, int side);

// perlin_noise(saliency_gate(make_random_grid(cells, rng), s), side)
NoiseField spng(const SaliencyMap& s, int side, int cells, Rng& rng);
NoiseField spng(const SaliencyMap& s, int side, Rng& rng); // samples the cell count

} // namespace sgsf::perlin
