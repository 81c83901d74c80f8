#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the image, occlusion and network code.
// Every entry has a scalar reference implementation and, on x86-64 with AVX2,
// a vectorized variant selected once at startup. The two are equivalence-tested
// against each other; callers only ever go through the active table.

namespace veil::kern {

enum class Isa { scalar, avx2 };

struct Kernels {
    // C (MxN) = A (MxK) * B (KxN) + beta * C, row-major, dense.
    void (*gemm_nn)(int M, int N, int K, const double* A, const double* B, double* C,
                    double beta);
    // C (MxN) = A (MxK) * B^T + beta * C, with B stored row-major as (NxK).
    void (*gemm_nt)(int M, int N, int K, const double* A, const double* B, double* C,
                    double beta);
    // dst[i] = sum_t taps[t] * src[i + t], i in [0, n_out). src has n_out+n_taps-1 values.
    void (*fir_valid)(const double* src, double* dst, int n_out, const double* taps,
                      int n_taps);
    double (*dot)(const double* a, const double* b, size_t n);
    double (*sum)(const double* a, size_t n);
    void (*axpy)(double a, const double* x, double* y, size_t n);  // y += a*x
    void (*scale)(double a, double* x, size_t n);                  // x *= a
    void (*vmul)(const double* a, const double* b, double* dst, size_t n);
    void (*lrelu_fwd)(const double* x, double* y, double slope, size_t n);
    void (*lrelu_bwd)(const double* x, const double* gy, double* gx, double slope, size_t n);
    void (*sigmoid_fwd)(const double* x, double* y, size_t n);
    // out[c][i] = alpha[i]*scene[c][i] + (1-alpha[i])*occ[c][i], planar layout.
    void (*composite)(const double* alpha, const double* scene, const double* occ,
                      double* out, int channels, int hw);
    // Adam with precomputed bias corrections bc1 = 1/(1-b1^t), bc2 = 1/(1-b2^t).
    void (*adam_step)(double* w, double* m, double* v, const double* g, size_t n, double lr,
                      double beta1, double beta2, double eps, double bc1, double bc2);
};

const Kernels& active();
const Kernels& scalar_table();

bool avx2_available();
Isa active_isa();

// Test hook; throws RangeError when the requested ISA is not available.
void force_isa(Isa isa);

}  // namespace veil::kern
