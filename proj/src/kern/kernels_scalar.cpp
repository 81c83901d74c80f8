#include <cmath>
#include <cstddef>

#include "veil/kern/kernels.hpp"

namespace veil::kern {
namespace {

void gemm_nn_scalar(int M, int N, int K, const double* A, const double* B, double* C,
                    double beta) {
    for (int i = 0; i < M; ++i) {
        double* c = C + static_cast<size_t>(i) * N;
        if (beta == 0.0) {
            for (int j = 0; j < N; ++j) c[j] = 0.0;
        } else if (beta != 1.0) {
            for (int j = 0; j < N; ++j) c[j] *= beta;
        }
        const double* a = A + static_cast<size_t>(i) * K;
        for (int k = 0; k < K; ++k) {
            const double aik = a[k];
            const double* b = B + static_cast<size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += aik * b[j];
        }
    }
}

void gemm_nt_scalar(int M, int N, int K, const double* A, const double* B, double* C,
                    double beta) {
    for (int i = 0; i < M; ++i) {
        const double* a = A + static_cast<size_t>(i) * K;
        double* c = C + static_cast<size_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const double* b = B + static_cast<size_t>(j) * K;
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += a[k] * b[k];
            c[j] = (beta == 0.0) ? acc : beta * c[j] + acc;
        }
    }
}

void fir_valid_scalar(const double* src, double* dst, int n_out, const double* taps,
                      int n_taps) {
    for (int i = 0; i < n_out; ++i) {
        double acc = 0.0;
        for (int t = 0; t < n_taps; ++t) acc += taps[t] * src[i + t];
        dst[i] = acc;
    }
}

double dot_scalar(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* a, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] *= a;
}

void vmul_scalar(const double* a, const double* b, double* dst, size_t n) {
    for (size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void lrelu_fwd_scalar(const double* x, double* y, double slope, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void lrelu_bwd_scalar(const double* x, const double* gy, double* gx, double slope, size_t n) {
    for (size_t i = 0; i < n; ++i) gx[i] = x[i] > 0.0 ? gy[i] : slope * gy[i];
}

void sigmoid_fwd_scalar(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void composite_scalar(const double* alpha, const double* scene, const double* occ,
                      double* out, int channels, int hw) {
    for (int c = 0; c < channels; ++c) {
        const size_t off = static_cast<size_t>(c) * hw;
        for (int i = 0; i < hw; ++i) {
            const double a = alpha[i];
            out[off + i] = a * scene[off + i] + (1.0 - a) * occ[off + i];
        }
    }
}

void adam_step_scalar(double* w, double* m, double* v, const double* g, size_t n, double lr,
                      double beta1, double beta2, double eps, double bc1, double bc2) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] * bc1;
        const double vhat = v[i] * bc2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const Kernels& scalar_table() {
    static const Kernels table = {
        gemm_nn_scalar, gemm_nt_scalar, fir_valid_scalar, dot_scalar,     sum_scalar,
        axpy_scalar,    scale_scalar,   vmul_scalar,      lrelu_fwd_scalar,
        lrelu_bwd_scalar, sigmoid_fwd_scalar, composite_scalar, adam_step_scalar,
    };
    return table;
}

}  // namespace veil::kern
