#include "sgsf/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>

// AVX2+FMA variants. This translation unit is compiled with -mavx2 -mfma and
// only ever entered after the runtime CPU check in avx2_available().

namespace sgsf::kernels {
namespace {

// Rank-1 update formulation, rows of C register-blocked by 4: one load of a
// B row feeds four FMAs.
inline void gemm_axpy_block(const double* a, const double* b, double* c, int m, int n, int k,
                            bool a_transposed) {
    auto a_at = [&](int i, int p) -> double {
        return a_transposed ? a[static_cast<size_t>(p) * m + i] : a[static_cast<size_t>(i) * k + p];
    };

    int i = 0;
    for (; i + 4 <= m; i += 4) {
        double* c0 = c + static_cast<size_t>(i) * n;
        double* c1 = c0 + n;
        double* c2 = c1 + n;
        double* c3 = c2 + n;
        for (int p = 0; p < k; ++p) {
            const double* brow = b + static_cast<size_t>(p) * n;
            const __m256d a0 = _mm256_set1_pd(a_at(i + 0, p));
            const __m256d a1 = _mm256_set1_pd(a_at(i + 1, p));
            const __m256d a2 = _mm256_set1_pd(a_at(i + 2, p));
            const __m256d a3 = _mm256_set1_pd(a_at(i + 3, p));
            int j = 0;
            for (; j + 4 <= n; j += 4) {
                const __m256d bv = _mm256_loadu_pd(brow + j);
                _mm256_storeu_pd(c0 + j, _mm256_fmadd_pd(a0, bv, _mm256_loadu_pd(c0 + j)));
                _mm256_storeu_pd(c1 + j, _mm256_fmadd_pd(a1, bv, _mm256_loadu_pd(c1 + j)));
                _mm256_storeu_pd(c2 + j, _mm256_fmadd_pd(a2, bv, _mm256_loadu_pd(c2 + j)));
                _mm256_storeu_pd(c3 + j, _mm256_fmadd_pd(a3, bv, _mm256_loadu_pd(c3 + j)));
            }
            for (; j < n; ++j) {
                const double bv = brow[j];
                c0[j] += a_at(i + 0, p) * bv;
                c1[j] += a_at(i + 1, p) * bv;
                c2[j] += a_at(i + 2, p) * bv;
                c3[j] += a_at(i + 3, p) * bv;
            }
        }
    }
    for (; i < m; ++i) {
        double* crow = c + static_cast<size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const __m256d av = _mm256_set1_pd(a_at(i, p));
            const double* brow = b + static_cast<size_t>(p) * n;
            int j = 0;
            for (; j + 4 <= n; j += 4)
                _mm256_storeu_pd(crow + j,
                                 _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j),
                                                 _mm256_loadu_pd(crow + j)));
            for (; j < n; ++j) crow[j] += a_at(i, p) * brow[j];
        }
    }
}

void gemm_nn_avx2(const double* a, const double* b, double* c, int m, int n, int k,
                  bool accumulate) {
    if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
    gemm_axpy_block(a, b, c, m, n, k, false);
}

void gemm_tn_avx2(const double* a, const double* b, double* c, int m, int n, int k,
                  bool accumulate) {
    if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
    gemm_axpy_block(a, b, c, m, n, k, true);
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void gemm_nt_avx2(const double* a, const double* b, double* c, int m, int n, int k,
                  bool accumulate) {
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<size_t>(i) * k;
        double* crow = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* brow = b + static_cast<size_t>(j) * k;
            __m256d acc = _mm256_setzero_pd();
            int p = 0;
            for (; p + 4 <= k; p += 4)
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(brow + p), acc);
            double dot = hsum(acc);
            for (; p < k; ++p) dot += arow[p] * brow[p];
            if (accumulate)
                crow[j] += dot;
            else
                crow[j] = dot;
        }
    }
}

void relu_fwd_avx2(const double* x, double* y, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_avx2(const double* y, const double* dy, double* dx, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(y + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dx + i, _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
    }
    for (; i < n; ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i,
                         _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void adam_step_avx2(double* p, const double* g, double* m, double* v, std::size_t n, double lr,
                    double beta1, double beta2, double eps, double c1, double c2) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d ob1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d ob2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d inv_c1 = _mm256_set1_pd(1.0 / c1);
    const __m256d inv_c2 = _mm256_set1_pd(1.0 / c2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_fmadd_pd(ob1, gv, _mm256_mul_pd(b1, mv));
        vv = _mm256_fmadd_pd(ob2, _mm256_mul_pd(gv, gv), _mm256_mul_pd(b2, vv));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_mul_pd(mv, inv_c1);
        const __m256d vhat = _mm256_mul_pd(vv, inv_c2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
}

double reduce_sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double reduce_max_avx2(const double* x, std::size_t n) {
    if (n < 8) {
        double m = x[0];
        for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
        return m;
    }
    __m256d acc = _mm256_loadu_pd(x);
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

double sq_diff_sum_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

const KernelTable table = {
    "avx2",        gemm_nn_avx2, gemm_tn_avx2,    gemm_nt_avx2,
    relu_fwd_avx2, relu_bwd_avx2, axpy_avx2,      adam_step_avx2,
    reduce_sum_avx2, reduce_max_avx2, sq_diff_sum_avx2,
};

} // namespace

bool avx2_available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const KernelTable& avx2_kernels() { return table; }

} // namespace sgsf::kernels

#endif // x86-64
