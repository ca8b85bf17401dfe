#pragma once

#include <atomic>
#include <cstdint>

namespace sgsf::instrument {

// Lightweight call counters. Tests use them to prove that the evaluation
// path never touches sample forging and that the textureless fallback gate
// actually fires.
inline std::atomic<std::uint64_t> random_grids{0};
inline std::atomic<std::uint64_t> noise_fields{0};
inline std::atomic<std::uint64_t> forged_samples{0};
inline std::atomic<std::uint64_t> composites{0};
inline std::atomic<std::uint64_t> textureless_fallbacks{0};

inline void reset() {
    random_grids = 0;
    noise_fields = 0;
    forged_samples = 0;
    composites = 0;
    textureless_fallbacks = 0;
}

} // namespace sgsf::instrument
