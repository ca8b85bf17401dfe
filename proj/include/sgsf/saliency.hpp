#pragma once

#include <optional>
#include <string>

#include "sgsf/grid.hpp"
#include "sgsf/image.hpp"

namespace sgsf::saliency {

// Grayscale load of <dir>/<stem>.png rescaled to [0,1], nearest-neighbour
// resized to side. nullopt when the file does not exist.
std::optional<SaliencyMap> try_load_saliency(const std::string& dir, const std::string& stem,
                                             int side);

// Built-in stand-in for an external saliency model: |gray - median(gray)|
// min-max normalized, then 11x11 mean-filtered. Maps whose normalized 90th
// percentile is below 0.1 are declared textureless and come back all-zero,
// which routes the downstream noise gate to its fallback.
SaliencyMap heuristic_saliency(const Image& img);

// Exact-zero semantics: true iff sum(S) == 0.
bool is_textureless(const SaliencyMap& s);

// Precomputed maps when a directory is given, heuristic otherwise. A missing
// file logs a warning and falls back; it is never fatal.
class SaliencyProvider {
public:
    SaliencyProvider() = default;
    explicit SaliencyProvider(std::string dir) : dir_(std::move(dir)) {}

    SaliencyMap get(const Image& img, const std::string& stem) const;

    bool has_dir() const { return !dir_.empty(); }

private:
    std::string dir_;
};

} // namespace sgsf::saliency
