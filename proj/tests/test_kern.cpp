#include <doctest.h>

#include <cmath>
#include <vector>

#include "veil/core/common.hpp"
#include "veil/kern/kernels.hpp"

using veil::Rng;
namespace kern = veil::kern;

namespace {

std::vector<double> random_vec(Rng& rng, size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
        REQUIRE(std::abs(a[i] - b[i]) <= tol * scale);
    }
}

}  // namespace

TEST_CASE("gemm_nn matches a hand-computed 2x2 product") {
    // A = [1 2; 3 4], B = [5 6; 7 8] -> C = [19 22; 43 50]
    const std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8};
    std::vector<double> c(4, 0.0);
    kern::scalar_table().gemm_nn(2, 2, 2, a.data(), b.data(), c.data(), 0.0);
    CHECK(c == std::vector<double>{19, 22, 43, 50});

    // beta accumulates into C
    kern::scalar_table().gemm_nn(2, 2, 2, a.data(), b.data(), c.data(), 1.0);
    CHECK(c == std::vector<double>{38, 44, 86, 100});
}

TEST_CASE("gemm_nt equals gemm_nn with explicit transpose") {
    Rng rng(7);
    const int M = 5, N = 9, K = 13;
    const auto a = random_vec(rng, M * K);
    const auto b = random_vec(rng, N * K);  // stores B as N x K
    std::vector<double> bt(K * N);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < N; ++j) bt[k * N + j] = b[j * K + k];
    std::vector<double> c1(M * N, 0.0), c2(M * N, 0.0);
    kern::scalar_table().gemm_nt(M, N, K, a.data(), b.data(), c1.data(), 0.0);
    kern::scalar_table().gemm_nn(M, N, K, a.data(), bt.data(), c2.data(), 0.0);
    expect_close(c1, c2, 1e-13);
}

TEST_CASE("AVX2 kernels match the scalar reference") {
    if (!kern::avx2_available()) {
        MESSAGE("AVX2 not available; equivalence suite skipped");
        return;
    }
    const kern::Kernels& s = kern::scalar_table();
    kern::force_isa(kern::Isa::avx2);
    const kern::Kernels& v = kern::active();
    Rng rng(42);

    SUBCASE("gemm_nn, including ragged tails") {
        for (int trial = 0; trial < 6; ++trial) {
            const int M = rng.uniform_int(1, 9);
            const int N = rng.uniform_int(1, 40);
            const int K = rng.uniform_int(1, 17);
            const auto a = random_vec(rng, static_cast<size_t>(M) * K);
            const auto b = random_vec(rng, static_cast<size_t>(K) * N);
            auto c1 = random_vec(rng, static_cast<size_t>(M) * N);
            auto c2 = c1;
            const double beta = trial % 2 ? 0.0 : 0.5;
            s.gemm_nn(M, N, K, a.data(), b.data(), c1.data(), beta);
            v.gemm_nn(M, N, K, a.data(), b.data(), c2.data(), beta);
            expect_close(c1, c2, 1e-12);
        }
    }
    SUBCASE("gemm_nt") {
        const int M = 7, N = 11, K = 23;
        const auto a = random_vec(rng, static_cast<size_t>(M) * K);
        const auto b = random_vec(rng, static_cast<size_t>(N) * K);
        std::vector<double> c1(M * N, 0.0), c2(M * N, 0.0);
        s.gemm_nt(M, N, K, a.data(), b.data(), c1.data(), 0.0);
        v.gemm_nt(M, N, K, a.data(), b.data(), c2.data(), 0.0);
        expect_close(c1, c2, 1e-12);
    }
    SUBCASE("fir_valid") {
        for (int n_taps : {1, 3, 9, 31}) {
            const int n_out = rng.uniform_int(1, 70);
            const auto src = random_vec(rng, n_out + n_taps - 1);
            const auto taps = random_vec(rng, n_taps);
            std::vector<double> d1(n_out), d2(n_out);
            s.fir_valid(src.data(), d1.data(), n_out, taps.data(), n_taps);
            v.fir_valid(src.data(), d2.data(), n_out, taps.data(), n_taps);
            expect_close(d1, d2, 1e-12);
        }
    }
    SUBCASE("reductions and elementwise ops") {
        const size_t n = 1031;
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        CHECK(s.dot(a.data(), b.data(), n) == doctest::Approx(v.dot(a.data(), b.data(), n)).epsilon(1e-12));
        CHECK(s.sum(a.data(), n) == doctest::Approx(v.sum(a.data(), n)).epsilon(1e-12));

        auto y1 = b, y2 = b;
        s.axpy(0.7, a.data(), y1.data(), n);
        v.axpy(0.7, a.data(), y2.data(), n);
        expect_close(y1, y2, 1e-13);

        auto x1 = a, x2 = a;
        s.scale(-1.3, x1.data(), n);
        v.scale(-1.3, x2.data(), n);
        expect_close(x1, x2, 1e-13);

        std::vector<double> m1(n), m2(n);
        s.vmul(a.data(), b.data(), m1.data(), n);
        v.vmul(a.data(), b.data(), m2.data(), n);
        expect_close(m1, m2, 1e-13);

        std::vector<double> l1(n), l2(n);
        s.lrelu_fwd(a.data(), l1.data(), 0.2, n);
        v.lrelu_fwd(a.data(), l2.data(), 0.2, n);
        expect_close(l1, l2, 1e-15);
        s.lrelu_bwd(a.data(), b.data(), l1.data(), 0.2, n);
        v.lrelu_bwd(a.data(), b.data(), l2.data(), 0.2, n);
        expect_close(l1, l2, 1e-15);
    }
    SUBCASE("composite") {
        const int hw = 257, ch = 3;
        auto alpha = random_vec(rng, hw, 0.0, 1.0);
        const auto scene = random_vec(rng, static_cast<size_t>(ch) * hw, 0.0, 1.0);
        const auto occ = random_vec(rng, static_cast<size_t>(ch) * hw, 0.0, 1.0);
        std::vector<double> o1(scene.size()), o2(scene.size());
        s.composite(alpha.data(), scene.data(), occ.data(), o1.data(), ch, hw);
        v.composite(alpha.data(), scene.data(), occ.data(), o2.data(), ch, hw);
        expect_close(o1, o2, 1e-15);
    }
    SUBCASE("adam_step") {
        const size_t n = 101;
        auto w1 = random_vec(rng, n), m1 = random_vec(rng, n, 0.0, 0.1),
             v1 = random_vec(rng, n, 0.0, 0.1);
        const auto g = random_vec(rng, n);
        auto w2 = w1, m2 = m1, v2 = v1;
        s.adam_step(w1.data(), m1.data(), v1.data(), g.data(), n, 1e-3, 0.5, 0.999, 1e-8, 1.2,
                    1.1);
        v.adam_step(w2.data(), m2.data(), v2.data(), g.data(), n, 1e-3, 0.5, 0.999, 1e-8, 1.2,
                    1.1);
        expect_close(w1, w2, 1e-13);
        expect_close(m1, m2, 1e-13);
        expect_close(v1, v2, 1e-13);
    }
    kern::force_isa(kern::Isa::avx2);  // leave default active
}

TEST_CASE("adam_step single step matches the closed form") {
    const kern::Kernels& s = kern::scalar_table();
    double w = 1.0, m = 0.0, v = 0.0;
    const double g = 0.5, lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 / (1.0 - b1), bc2 = 1.0 / (1.0 - b2);
    s.adam_step(&w, &m, &v, &g, 1, lr, b1, b2, eps, bc1, bc2);
    // First step: mhat = g, vhat = g^2, update = lr * g / (|g| + eps)
    CHECK(w == doctest::Approx(1.0 - lr * g / (std::abs(g) + eps)).epsilon(1e-12));
}
