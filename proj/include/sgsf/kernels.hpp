#pragma once

#include <cstddef>

namespace sgsf::kernels {

// Hot arithmetic loops behind function pointers. Every entry has a scalar
// reference implementation; ISA variants (AVX2+FMA on x86-64) are selected
// once at startup and must agree with the reference within test tolerances.
//
// GEMM operands are dense row-major. All three forms accumulate into C when
// `accumulate` is true and overwrite it otherwise.
struct KernelTable {
    const char* name;

    // C[MxN] = A[MxK] * B[KxN]
    void (*gemm_nn)(const double* a, const double* b, double* c, int m, int n, int k,
                    bool accumulate);
    // C[MxN] = A^T * B with A stored [KxM]
    void (*gemm_tn)(const double* a, const double* b, double* c, int m, int n, int k,
                    bool accumulate);
    // C[MxN] = A * B^T with B stored [NxK]
    void (*gemm_nt)(const double* a, const double* b, double* c, int m, int n, int k,
                    bool accumulate);

    void (*relu_fwd)(const double* x, double* y, std::size_t n);
    // dx = dy where y > 0 else 0 (uses the forward output)
    void (*relu_bwd)(const double* y, const double* dy, double* dx, std::size_t n);

    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // Fused Adam update: m,v moment buffers, c1/c2 the bias corrections
    // (1-beta1^t, 1-beta2^t).
    void (*adam_step)(double* p, const double* g, double* m, double* v, std::size_t n,
                      double lr, double beta1, double beta2, double eps, double c1, double c2);

    double (*reduce_sum)(const double* x, std::size_t n);
    double (*reduce_max)(const double* x, std::size_t n);
    // sum((x-y)^2)
    double (*sq_diff_sum)(const double* x, const double* y, std::size_t n);
};

const KernelTable& scalar_kernels();

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_available();
const KernelTable& avx2_kernels();
#endif

// The table picked at first use: honours SGSF_KERNELS=scalar|avx2 when set,
// otherwise the best variant the CPU supports.
const KernelTable& active();

} // namespace sgsf::kernels
