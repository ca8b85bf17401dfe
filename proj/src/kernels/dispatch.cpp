#include "sgsf/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace sgsf::kernels {
namespace {

const KernelTable* pick() {
    const char* req = std::getenv("SGSF_KERNELS");
    if (req != nullptr) {
        if (std::strcmp(req, "scalar") == 0) return &scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(req, "avx2") == 0) {
            if (!avx2_available()) throw std::runtime_error("SGSF_KERNELS=avx2 but CPU lacks AVX2/FMA");
            return &avx2_kernels();
        }
#endif
        throw std::runtime_error(std::string("unknown SGSF_KERNELS value: ") + req);
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_available()) return &avx2_kernels();
#endif
    return &scalar_kernels();
}

} // namespace

const KernelTable& active() {
    static const KernelTable* chosen = pick();
    return *chosen;
}

} // namespace sgsf::kernels
