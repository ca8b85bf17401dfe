#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgsf {

enum class SelfTask { reconstruction, denoising };

// Every tunable of the toolchain. Defaults are the reference operating
// point; the desk-scale runs override image_side, base_channels and
// total_epochs.
struct RunConfig {
    int image_side = 256;
    int channels = 3;

    // Adaptive mask threshold mu = a + mean(S) * b
    double a = 0.4;
    double b = 0.2;

    // Opacity range for forged-sample blending
    double alpha_lo = 0.1;
    double alpha_hi = 1.0;

    // Forged-to-normal mixing ratio r (a slot is forged with p = r/(r+1))
    double forged_ratio = 3.0;

    int n_contrast = 5;

    double lambda = 1.0; // weight of the reconstruction losses
    double tau = 2.0;    // focal focusing exponent

    double lr = 1e-4;
    int batch_size = 16;
    int total_epochs = 800;
    std::vector<double> decay_milestones = {0.5, 0.7, 0.9};

    std::uint64_t seed = 0;

    int smoothing_window = 21; // box filter for the image-level score
    int ssim_window = 11;      // structural-similarity block side

    SelfTask self_task = SelfTask::reconstruction;

    int base_channels = 64;   // channels of the shallowest pyramid level
    int checkpoint_every = 0; // epochs between snapshots; 0 = final only

    // Throws ValidationError naming the offending field.
    void validate() const;
};

std::string to_string(SelfTask t);
SelfTask self_task_from_string(const std::string& s);

// Flat key/value text format ("key = value", '#' comments). Unknown or
// duplicate keys are rejected so hyperparameter typos cannot pass silently.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_fingerprint(const RunConfig& cfg);

} // namespace sgsf
