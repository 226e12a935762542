#include "gear/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace gear::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemm_acc_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                     std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
            c[i * n + j] += s;
        }
    }
}

void gemm_acc_bt_scalar(const double* a, const double* b, double* c, std::size_t m,
                        std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) c[i * k + j] += dot_scalar(a + i * n, b + j * n, n);
}

void gemm_acc_at_scalar(const double* a, const double* b, double* c, std::size_t k,
                        std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
            c[i * n + j] += s;
        }
    }
}

void adam_update_scalar(double* w, const double* g, double* m, double* v, std::size_t n,
                        double beta1, double beta2, double lr_t, double eps_t) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        w[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps_t);
    }
}

const KernelTable kScalar{Isa::Scalar,        dot_scalar,         axpy_scalar,
                          gemm_acc_scalar,    gemm_acc_bt_scalar, gemm_acc_at_scalar,
                          adam_update_scalar};

const KernelTable* detect() {
    if (const char* env = std::getenv("GEAR_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return &kScalar;
        if (want == "avx2" && avx2_table()) return avx2_table();
        if (want == "neon" && neon_table()) return neon_table();
    }
    if (const KernelTable* t = avx2_table()) return t;
    if (const KernelTable* t = neon_table()) return t;
    return &kScalar;
}

const KernelTable*& current() {
    static const KernelTable* table = detect();
    return table;
}

} // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

const KernelTable& active() { return *current(); }

void set_active(const KernelTable& table) { current() = &table; }

} // namespace gear::kernels
