#pragma once
// Dense double-precision inner loops used by the autodiff tape and the
// optimizer. Every kernel has a scalar reference implementation; SIMD
// variants (AVX2+FMA on x86-64, NEON on aarch64) are selected once at
// startup and must agree with the reference within rounding.

#include <cstddef>
#include <string_view>

namespace gear::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// Table of function pointers for one instruction set.
struct KernelTable {
    Isa isa;
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // C(m x n) += A(m x k) * B(k x n), all row-major
    void (*gemm_acc)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                     std::size_t n);
    // C(m x k) += A(m x n) * B(k x n)^T
    void (*gemm_acc_bt)(const double* a, const double* b, double* c, std::size_t m,
                        std::size_t n, std::size_t k);
    // C(m x n) += A(k x m)^T * B(k x n)
    void (*gemm_acc_at)(const double* a, const double* b, double* c, std::size_t k,
                        std::size_t m, std::size_t n);
    // One Adam step with bias correction folded into lr_t and eps_t.
    // g already contains any L2 term.
    void (*adam_update)(double* w, const double* g, double* m, double* v, std::size_t n,
                        double beta1, double beta2, double lr_t, double eps_t);
};

const KernelTable& scalar_table();
// nullptr when the variant was not compiled in for this target.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// The table in use. Chosen on first call from CPU features; the GEAR_SIMD
// environment variable ("scalar", "avx2", "neon") overrides detection.
const KernelTable& active();

// Forces a table for the rest of the process (tests and benchmarks).
void set_active(const KernelTable& table);

} // namespace gear::kernels
