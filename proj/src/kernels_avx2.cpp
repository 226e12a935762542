// Compiled with -mavx2 -mfma on x86-64; only entered after a runtime CPU check.
#include "gear/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace gear::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void gemm_acc_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                   std::size_t n) {
    if (n == 1) {
        for (std::size_t i = 0; i < m; ++i) c[i] += dot_avx2(a + i * k, b, k);
        return;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) axpy_avx2(a[i * k + p], b + p * n, c + i * n, n);
}

void gemm_acc_bt_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                      std::size_t k) {
    if (n == 1) {
        // outer product: row i of C gets a[i] * b
        for (std::size_t i = 0; i < m; ++i) axpy_avx2(a[i], b, c + i * k, k);
        return;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) c[i * k + j] += dot_avx2(a + i * n, b + j * n, n);
}

void gemm_acc_at_avx2(const double* a, const double* b, double* c, std::size_t k, std::size_t m,
                      std::size_t n) {
    if (n == 1) {
        for (std::size_t p = 0; p < k; ++p) axpy_avx2(b[p], a + p * m, c, m);
        return;
    }
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t i = 0; i < m; ++i) axpy_avx2(a[p * m + i], b + p * n, c + i * n, n);
}

void adam_update_avx2(double* w, const double* g, double* m, double* v, std::size_t n,
                      double beta1, double beta2, double lr_t, double eps_t) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d b2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d lr = _mm256_set1_pd(lr_t);
    const __m256d eps = _mm256_set1_pd(eps_t);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(b1c, vg));
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(b2c, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d step =
            _mm256_div_pd(_mm256_mul_pd(lr, vm), _mm256_add_pd(_mm256_sqrt_pd(vv), eps));
        _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        w[i] -= (lr_t * m[i]) / (__builtin_sqrt(v[i]) + eps_t);
    }
}

const KernelTable kAvx2{Isa::Avx2,       dot_avx2,         axpy_avx2,
                        gemm_acc_avx2,   gemm_acc_bt_avx2, gemm_acc_at_avx2,
                        adam_update_avx2};

} // namespace

const KernelTable* avx2_table() {
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok ? &kAvx2 : nullptr;
}

} // namespace gear::kernels

#else

namespace gear::kernels {
const KernelTable* avx2_table() { return nullptr; }
} // namespace gear::kernels

#endif
