#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgsf/config.hpp"
#include "sgsf/grid.hpp"
#include "sgsf/image.hpp"
#include "sgsf/rng.hpp"

namespace sgsf::forge {

// Composited anomalous training sample: image I, its pixel labels, the
// generating mask and the blend opacity.
struct ForgedSample {
    Image image;
    PixelLabels label;
    BinaryMask mask;
    double alpha = 0.0;
    std::string source_stem;
};

// mu = a + mean(S) * b, so mu ranges over [a, a+b].
double adaptive_threshold(const SaliencyMap& s, double a, double b);

// Threshold the noise field: mask = (G > mu). Returns nullopt when the mask
// is empty or covers more than 90% of pixels; callers resample the noise.
std::optional<BinaryMask> make_mask(const NoiseField& g, double mu);

// Three augmentations sampled without replacement from: brightness scale,
// contrast scale, channel permutation, 90-degree rotation, flip, solarize,
// posterize. Output stays in [0,1].
Image augment_auxiliary(const Image& b, Rng& rng);

// I = A.(1-M) + alpha*(B.M) + (1-alpha)*(A.M); labels combine the all-normal
// source with the all-anomalous auxiliary, so y_I equals M.
ForgedSample compose(const Image& a, const Image& b, const BinaryMask& m, double alpha);

// Full generator: saliency-gated noise -> adaptive threshold -> mask (up to
// 10 noise resamples) -> augmented auxiliary -> uniform alpha -> compose.
// nullopt when mask generation keeps failing (callers skip the sample).
std::optional<ForgedSample> forge_sample(const Image& a, const SaliencyMap& s,
                                         const std::vector<Image>& aux_pool,
                                         const RunConfig& cfg, Rng& rng,
                                         const std::string& source_stem = "");

struct MixedSample {
    Image image;
    PixelLabels label;
    bool is_forged = false;
    std::string source_stem;
};

// One output slot per input: forged with probability r/(r+1), the untouched
// normal otherwise (also when forging is skipped). Normal slots carry
// all-zero labels.
std::vector<MixedSample> mix_batch(const std::vector<const Image*>& normals,
                                   const std::vector<const SaliencyMap*>& saliencies,
                                   const std::vector<std::string>& stems,
                                   const std::vector<Image>& aux_pool, const RunConfig& cfg,
                                   Rng& rng);

} // namespace sgsf::forge
