#include "gear/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

#include <cmath>

namespace gear::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void gemm_acc_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                   std::size_t n) {
    if (n == 1) {
        for (std::size_t i = 0; i < m; ++i) c[i] += dot_neon(a + i * k, b, k);
        return;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) axpy_neon(a[i * k + p], b + p * n, c + i * n, n);
}

void gemm_acc_bt_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                      std::size_t k) {
    if (n == 1) {
        for (std::size_t i = 0; i < m; ++i) axpy_neon(a[i], b, c + i * k, k);
        return;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) c[i * k + j] += dot_neon(a + i * n, b + j * n, n);
}

void gemm_acc_at_neon(const double* a, const double* b, double* c, std::size_t k, std::size_t m,
                      std::size_t n) {
    if (n == 1) {
        for (std::size_t p = 0; p < k; ++p) axpy_neon(b[p], a + p * m, c, m);
        return;
    }
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t i = 0; i < m; ++i) axpy_neon(a[p * m + i], b + p * n, c + i * n, n);
}

void adam_update_neon(double* w, const double* g, double* m, double* v, std::size_t n,
                      double beta1, double beta2, double lr_t, double eps_t) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vg = vld1q_f64(g + i);
        float64x2_t vm = vaddq_f64(vmulq_n_f64(vld1q_f64(m + i), beta1), vmulq_n_f64(vg, 1.0 - beta1));
        float64x2_t vv = vaddq_f64(vmulq_n_f64(vld1q_f64(v + i), beta2),
                                   vmulq_n_f64(vmulq_f64(vg, vg), 1.0 - beta2));
        vst1q_f64(m + i, vm);
        vst1q_f64(v + i, vv);
        const float64x2_t step =
            vdivq_f64(vmulq_n_f64(vm, lr_t), vaddq_f64(vsqrtq_f64(vv), vdupq_n_f64(eps_t)));
        vst1q_f64(w + i, vsubq_f64(vld1q_f64(w + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        w[i] -= (lr_t * m[i]) / (std::sqrt(v[i]) + eps_t);
    }
}

const KernelTable kNeon{Isa::Neon,       dot_neon,         axpy_neon,
                        gemm_acc_neon,   gemm_acc_bt_neon, gemm_acc_at_neon,
                        adam_update_neon};

} // namespace

const KernelTable* neon_table() { return &kNeon; }

} // namespace gear::kernels

#else

namespace gear::kernels {
const KernelTable* neon_table() { return nullptr; }
} // namespace gear::kernels

#endif
