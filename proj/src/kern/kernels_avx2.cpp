// AVX2+FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; it must not be entered unless cpuid reports both features.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "veil/kern/kernels.hpp"

namespace veil::kern {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void gemm_nn_avx2(int M, int N, int K, const double* A, const double* B, double* C,
                  double beta) {
    const int jb = N & ~15;  // 16-wide column tiles, two rows at a time
    int i = 0;
    for (; i + 1 < M; i += 2) {
        const double* a0 = A + static_cast<size_t>(i) * K;
        const double* a1 = a0 + K;
        double* c0 = C + static_cast<size_t>(i) * N;
        double* c1 = c0 + N;
        for (int j = 0; j < jb; j += 16) {
            __m256d acc00, acc01, acc02, acc03, acc10, acc11, acc12, acc13;
            if (beta == 0.0) {
                acc00 = acc01 = acc02 = acc03 = _mm256_setzero_pd();
                acc10 = acc11 = acc12 = acc13 = _mm256_setzero_pd();
            } else {
                const __m256d vb = _mm256_set1_pd(beta);
                acc00 = _mm256_mul_pd(vb, _mm256_loadu_pd(c0 + j + 0));
                acc01 = _mm256_mul_pd(vb, _mm256_loadu_pd(c0 + j + 4));
                acc02 = _mm256_mul_pd(vb, _mm256_loadu_pd(c0 + j + 8));
                acc03 = _mm256_mul_pd(vb, _mm256_loadu_pd(c0 + j + 12));
                acc10 = _mm256_mul_pd(vb, _mm256_loadu_pd(c1 + j + 0));
                acc11 = _mm256_mul_pd(vb, _mm256_loadu_pd(c1 + j + 4));
                acc12 = _mm256_mul_pd(vb, _mm256_loadu_pd(c1 + j + 8));
                acc13 = _mm256_mul_pd(vb, _mm256_loadu_pd(c1 + j + 12));
            }
            for (int k = 0; k < K; ++k) {
                const double* b = B + static_cast<size_t>(k) * N + j;
                const __m256d b0 = _mm256_loadu_pd(b + 0);
                const __m256d b1 = _mm256_loadu_pd(b + 4);
                const __m256d b2 = _mm256_loadu_pd(b + 8);
                const __m256d b3 = _mm256_loadu_pd(b + 12);
                const __m256d va0 = _mm256_set1_pd(a0[k]);
                const __m256d va1 = _mm256_set1_pd(a1[k]);
                acc00 = _mm256_fmadd_pd(va0, b0, acc00);
                acc01 = _mm256_fmadd_pd(va0, b1, acc01);
                acc02 = _mm256_fmadd_pd(va0, b2, acc02);
                acc03 = _mm256_fmadd_pd(va0, b3, acc03);
                acc10 = _mm256_fmadd_pd(va1, b0, acc10);
                acc11 = _mm256_fmadd_pd(va1, b1, acc11);
                acc12 = _mm256_fmadd_pd(va1, b2, acc12);
                acc13 = _mm256_fmadd_pd(va1, b3, acc13);
            }
            _mm256_storeu_pd(c0 + j + 0, acc00);
            _mm256_storeu_pd(c0 + j + 4, acc01);
            _mm256_storeu_pd(c0 + j + 8, acc02);
            _mm256_storeu_pd(c0 + j + 12, acc03);
            _mm256_storeu_pd(c1 + j + 0, acc10);
            _mm256_storeu_pd(c1 + j + 4, acc11);
            _mm256_storeu_pd(c1 + j + 8, acc12);
            _mm256_storeu_pd(c1 + j + 12, acc13);
        }
        for (int j = jb; j < N; ++j) {
            double s0 = beta == 0.0 ? 0.0 : beta * c0[j];
            double s1 = beta == 0.0 ? 0.0 : beta * c1[j];
            for (int k = 0; k < K; ++k) {
                const double b = B[static_cast<size_t>(k) * N + j];
                s0 += a0[k] * b;
                s1 += a1[k] * b;
            }
            c0[j] = s0;
            c1[j] = s1;
        }
    }
    for (; i < M; ++i) {
        const double* a = A + static_cast<size_t>(i) * K;
        double* c = C + static_cast<size_t>(i) * N;
        for (int j = 0; j < jb; j += 16) {
            __m256d acc0, acc1, acc2, acc3;
            if (beta == 0.0) {
                acc0 = acc1 = acc2 = acc3 = _mm256_setzero_pd();
            } else {
                const __m256d vb = _mm256_set1_pd(beta);
                acc0 = _mm256_mul_pd(vb, _mm256_loadu_pd(c + j + 0));
                acc1 = _mm256_mul_pd(vb, _mm256_loadu_pd(c + j + 4));
                acc2 = _mm256_mul_pd(vb, _mm256_loadu_pd(c + j + 8));
                acc3 = _mm256_mul_pd(vb, _mm256_loadu_pd(c + j + 12));
            }
            for (int k = 0; k < K; ++k) {
                const double* b = B + static_cast<size_t>(k) * N + j;
                const __m256d va = _mm256_set1_pd(a[k]);
                acc0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 0), acc0);
                acc1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 4), acc1);
                acc2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 8), acc2);
                acc3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + 12), acc3);
            }
            _mm256_storeu_pd(c + j + 0, acc0);
            _mm256_storeu_pd(c + j + 4, acc1);
            _mm256_storeu_pd(c + j + 8, acc2);
            _mm256_storeu_pd(c + j + 12, acc3);
        }
        for (int j = jb; j < N; ++j) {
            double s = beta == 0.0 ? 0.0 : beta * c[j];
            for (int k = 0; k < K; ++k) s += a[k] * B[static_cast<size_t>(k) * N + j];
            c[j] = s;
        }
    }
}

void gemm_nt_avx2(int M, int N, int K, const double* A, const double* B, double* C,
                  double beta) {
    const int kb = K & ~7;
    for (int i = 0; i < M; ++i) {
        const double* a = A + static_cast<size_t>(i) * K;
        double* c = C + static_cast<size_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const double* b = B + static_cast<size_t>(j) * K;
            __m256d acc0 = _mm256_setzero_pd();
            __m256d acc1 = _mm256_setzero_pd();
            int k = 0;
            for (; k < kb; k += 8) {
                acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
                acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4),
                                       acc1);
            }
            double s = hsum(_mm256_add_pd(acc0, acc1));
            for (; k < K; ++k) s += a[k] * b[k];
            c[j] = (beta == 0.0) ? s : beta * c[j] + s;
        }
    }
}

void fir_valid_avx2(const double* src, double* dst, int n_out, const double* taps,
                    int n_taps) {
    const int ib = n_out & ~3;
    int i = 0;
    for (; i < ib; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (int t = 0; t < n_taps; ++t)
            acc = _mm256_fmadd_pd(_mm256_set1_pd(taps[t]), _mm256_loadu_pd(src + i + t), acc);
        _mm256_storeu_pd(dst + i, acc);
    }
    for (; i < n_out; ++i) {
        double acc = 0.0;
        for (int t = 0; t < n_taps; ++t) acc += taps[t] * src[i + t];
        dst[i] = acc;
    }
}

double dot_avx2(const double* a, const double* b, size_t n) {
    const size_t nb = n & ~size_t(7);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i < nb; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_avx2(const double* a, size_t n) {
    const size_t nb = n & ~size_t(7);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i < nb; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i];
    return s;
}

void axpy_avx2(double a, const double* x, double* y, size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const size_t nb = n & ~size_t(3);
    size_t i = 0;
    for (; i < nb; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const size_t nb = n & ~size_t(3);
    size_t i = 0;
    for (; i < nb; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void vmul_avx2(const double* a, const double* b, double* dst, size_t n) {
    const size_t nb = n & ~size_t(3);
    size_t i = 0;
    for (; i < nb; i += 4)
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void lrelu_fwd_avx2(const double* x, double* y, double slope, size_t n) {
    const __m256d vs = _mm256_set1_pd(slope);
    const __m256d vz = _mm256_setzero_pd();
    const size_t nb = n & ~size_t(3);
    size_t i = 0;
    for (; i < nb; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d pos = _mm256_max_pd(v, vz);
        const __m256d neg = _mm256_min_pd(v, vz);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vs, neg, pos));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void lrelu_bwd_avx2(const double* x, const double* gy, double* gx, double slope, size_t n) {
    const __m256d vs = _mm256_set1_pd(slope);
    const __m256d vz = _mm256_setzero_pd();
    const size_t nb = n & ~size_t(3);
    size_t i = 0;
    for (; i < nb; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d g = _mm256_loadu_pd(gy + i);
        const __m256d mask = _mm256_cmp_pd(v, vz, _CMP_GT_OQ);
        _mm256_storeu_pd(gx + i, _mm256_blendv_pd(_mm256_mul_pd(vs, g), g, mask));
    }
    for (; i < n; ++i) gx[i] = x[i] > 0.0 ? gy[i] : slope * gy[i];
}

void sigmoid_fwd_ref(const double* x, double* y, size_t n) {
    // exp stays scalar; the surrounding loops are not hot enough to justify a
    // vector polynomial here.
    for (size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void composite_avx2(const double* alpha, const double* scene, const double* occ, double* out,
                    int channels, int hw) {
    const __m256d one = _mm256_set1_pd(1.0);
    const int nb = hw & ~3;
    for (int c = 0; c < channels; ++c) {
        const size_t off = static_cast<size_t>(c) * hw;
        int i = 0;
        for (; i < nb; i += 4) {
            const __m256d a = _mm256_loadu_pd(alpha + i);
            const __m256d s = _mm256_loadu_pd(scene + off + i);
            const __m256d o = _mm256_loadu_pd(occ + off + i);
            const __m256d r =
                _mm256_fmadd_pd(a, s, _mm256_mul_pd(_mm256_sub_pd(one, a), o));
            _mm256_storeu_pd(out + off + i, r);
        }
        for (; i < hw; ++i) {
            const double a = alpha[i];
            out[off + i] = a * scene[off + i] + (1.0 - a) * occ[off + i];
        }
    }
}

void adam_step_avx2(double* w, double* m, double* v, const double* g, size_t n, double lr,
                    double beta1, double beta2, double eps, double bc1, double bc2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vbc1 = _mm256_set1_pd(bc1);
    const __m256d vbc2 = _mm256_set1_pd(bc2);
    const size_t nb = n & ~size_t(3);
    size_t i = 0;
    for (; i < nb; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        __m256d mi = _mm256_loadu_pd(m + i);
        __m256d vi = _mm256_loadu_pd(v + i);
        mi = _mm256_fmadd_pd(vb1, mi, _mm256_mul_pd(vb1c, gi));
        vi = _mm256_fmadd_pd(vb2, vi, _mm256_mul_pd(vb2c, _mm256_mul_pd(gi, gi)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_mul_pd(mi, vbc1);
        const __m256d vhat = _mm256_mul_pd(vi, vbc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
        _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        w[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
    }
}

}  // namespace

const Kernels* avx2_table() {
    static const Kernels table = {
        gemm_nn_avx2, gemm_nt_avx2, fir_valid_avx2, dot_avx2,      sum_avx2,
        axpy_avx2,    scale_avx2,   vmul_avx2,      lrelu_fwd_avx2,
        lrelu_bwd_avx2, sigmoid_fwd_ref, composite_avx2, adam_step_avx2,
    };
    return &table;
}

}  // namespace veil::kern

#else

namespace veil::kern {
struct Kernels;
const Kernels* avx2_table() { return nullptr; }
}  // namespace veil::kern

#endif
