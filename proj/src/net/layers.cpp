#include "veil/net/layers.hpp"

#include <cmath>

#include "veil/kern/kernels.hpp"

namespace veil::net {

namespace {

void im2col(const Tensor& x, int k, int stride, int pad, int out_h, int out_w,
            std::vector<double>& col) {
    const int K = x.c * k * k;
    const size_t N = static_cast<size_t>(out_h) * out_w;
    col.assign(static_cast<size_t>(K) * N, 0.0);
    for (int c = 0; c < x.c; ++c) {
        const double* plane = x.plane_ptr(c);
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                double* dst = col.data() + (static_cast<size_t>(c) * k * k + ky * k + kx) * N;
                for (int oy = 0; oy < out_h; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= x.h) continue;
                    const double* src_row = plane + static_cast<size_t>(iy) * x.w;
                    double* dst_row = dst + static_cast<size_t>(oy) * out_w;
                    for (int ox = 0; ox < out_w; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        if (ix >= 0 && ix < x.w) dst_row[ox] = src_row[ix];
                    }
                }
            }
        }
    }
}

void col2im(const std::vector<double>& col, int c_in, int k, int stride, int pad, int in_h,
            int in_w, int out_h, int out_w, Tensor& gx) {
    const size_t N = static_cast<size_t>(out_h) * out_w;
    for (int c = 0; c < c_in; ++c) {
        double* plane = gx.plane_ptr(c);
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const double* src = col.data() + (static_cast<size_t>(c) * k * k + ky * k + kx) * N;
                for (int oy = 0; oy < out_h; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= in_h) continue;
                    double* dst_row = plane + static_cast<size_t>(iy) * in_w;
                    const double* src_row = src + static_cast<size_t>(oy) * out_w;
                    for (int ox = 0; ox < out_w; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        if (ix >= 0 && ix < in_w) dst_row[ix] += src_row[ox];
                    }
                }
            }
        }
    }
}

}  // namespace

Conv2d::Conv2d(int cin, int cout, int k, int stride, int pad, Rng& rng, double init_std)
    : cin_(cin), cout_(cout), k_(k), stride_(stride), pad_(pad) {
    weight_.resize(static_cast<size_t>(cout) * cin * k * k);
    for (double& w : weight_) w = rng.normal(0.0, init_std);
    bias_.assign(cout, 0.0);
    gweight_.assign(weight_.size(), 0.0);
    gbias_.assign(bias_.size(), 0.0);
}

Tensor Conv2d::forward(const Tensor& x) {
    check(x.c == cin_, "Conv2d: channel mismatch");
    in_h_ = x.h;
    in_w_ = x.w;
    out_h_ = (x.h + 2 * pad_ - k_) / stride_ + 1;
    out_w_ = (x.w + 2 * pad_ - k_) / stride_ + 1;
    check(out_h_ > 0 && out_w_ > 0, "Conv2d: output collapsed to zero extent");
    im2col(x, k_, stride_, pad_, out_h_, out_w_, col_);

    Tensor y = Tensor::create(cout_, out_h_, out_w_);
    const int K = cin_ * k_ * k_;
    const int N = out_h_ * out_w_;
    kern::active().gemm_nn(cout_, N, K, weight_.data(), col_.data(), y.data.data(), 0.0);
    for (int co = 0; co < cout_; ++co) {
        double* p = y.plane_ptr(co);
        const double b = bias_[co];
        for (int i = 0; i < N; ++i) p[i] += b;
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& gy, bool want_param_grads) {
    const int K = cin_ * k_ * k_;
    const int N = out_h_ * out_w_;
    check(gy.c == cout_ && gy.h == out_h_ && gy.w == out_w_, "Conv2d: bad gradient shape");

    if (want_param_grads) {
        // dW += gy (cout x N) * col^T (N x K)
        std::vector<double> gw(static_cast<size_t>(cout_) * K, 0.0);
        kern::active().gemm_nt(cout_, K, N, gy.data.data(), col_.data(), gw.data(), 0.0);
        kern::active().axpy(1.0, gw.data(), gweight_.data(), gw.size());
        for (int co = 0; co < cout_; ++co)
            gbias_[co] += kern::active().sum(gy.plane_ptr(co), static_cast<size_t>(N));
    }

    // gcol = W^T (K x cout) * gy (cout x N)
    std::vector<double> wt(static_cast<size_t>(K) * cout_);
    for (int co = 0; co < cout_; ++co)
        for (int kk = 0; kk < K; ++kk)
            wt[static_cast<size_t>(kk) * cout_ + co] = weight_[static_cast<size_t>(co) * K + kk];
    std::vector<double> gcol(static_cast<size_t>(K) * N);
    kern::active().gemm_nn(K, N, cout_, wt.data(), gy.data.data(), gcol.data(), 0.0);

    Tensor gx = Tensor::create(cin_, in_h_, in_w_, 0.0);
    col2im(gcol, cin_, k_, stride_, pad_, in_h_, in_w_, out_h_, out_w_, gx);
    return gx;
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamBlob>& out) {
    out.push_back({prefix + ".weight", &weight_, &gweight_});
    out.push_back({prefix + ".bias", &bias_, &gbias_});
}

InstanceNorm::InstanceNorm(int channels) : channels_(channels) {
    gamma_.assign(channels, 1.0);
    beta_.assign(channels, 0.0);
    ggamma_.assign(channels, 0.0);
    gbeta_.assign(channels, 0.0);
}

Tensor InstanceNorm::forward(const Tensor& x) {
    check(x.c == channels_, "InstanceNorm: channel mismatch");
    constexpr double kEps = 1e-5;
    const size_t n = x.plane();
    Tensor y = x;
    xhat_ = x;
    stdinv_.assign(channels_, 0.0);
    for (int c = 0; c < channels_; ++c) {
        const double* p = x.plane_ptr(c);
        const double mean = kern::active().sum(p, n) / static_cast<double>(n);
        double var = 0.0;
        for (size_t i = 0; i < n; ++i) var += (p[i] - mean) * (p[i] - mean);
        var /= static_cast<double>(n);
        const double inv = 1.0 / std::sqrt(var + kEps);
        stdinv_[c] = inv;
        double* xh = xhat_.plane_ptr(c);
        double* yo = y.plane_ptr(c);
        for (size_t i = 0; i < n; ++i) {
            xh[i] = (p[i] - mean) * inv;
            yo[i] = gamma_[c] * xh[i] + beta_[c];
        }
    }
    return y;
}

Tensor InstanceNorm::backward(const Tensor& gy, bool want_param_grads) {
    const size_t n = gy.plane();
    Tensor gx = gy;
    for (int c = 0; c < channels_; ++c) {
        const double* g = gy.plane_ptr(c);
        const double* xh = xhat_.plane_ptr(c);
        const double gsum = kern::active().sum(g, n);
        const double gxdot = kern::active().dot(g, xh, n);
        if (want_param_grads) {
            ggamma_[c] += gxdot;
            gbeta_[c] += gsum;
        }
        const double gmean = gsum / static_cast<double>(n);
        const double gxmean = gxdot / static_cast<double>(n);
        const double s = gamma_[c] * stdinv_[c];
        double* out = gx.plane_ptr(c);
        for (size_t i = 0; i < n; ++i) out[i] = s * (g[i] - gmean - xh[i] * gxmean);
    }
    return gx;
}

void InstanceNorm::collect_params(const std::string& prefix, std::vector<ParamBlob>& out) {
    out.push_back({prefix + ".gamma", &gamma_, &ggamma_});
    out.push_back({prefix + ".beta", &beta_, &gbeta_});
}

Tensor LeakyRelu::forward(const Tensor& x) {
    x_ = x;
    Tensor y = x;
    kern::active().lrelu_fwd(x.data.data(), y.data.data(), slope_, x.size());
    return y;
}

Tensor LeakyRelu::backward(const Tensor& gy, bool) {
    Tensor gx = gy;
    kern::active().lrelu_bwd(x_.data.data(), gy.data.data(), gx.data.data(), slope_,
                             gy.size());
    return gx;
}

Tensor UpsampleNearest2x::forward(const Tensor& x) {
    Tensor y = Tensor::create(x.c, x.h * 2, x.w * 2);
    for (int c = 0; c < x.c; ++c) {
        const double* src = x.plane_ptr(c);
        double* dst = y.plane_ptr(c);
        for (int yy = 0; yy < y.h; ++yy) {
            const double* row = src + static_cast<size_t>(yy / 2) * x.w;
            double* out = dst + static_cast<size_t>(yy) * y.w;
            for (int xx = 0; xx < y.w; ++xx) out[xx] = row[xx / 2];
        }
    }
    return y;
}

Tensor UpsampleNearest2x::backward(const Tensor& gy, bool) {
    Tensor gx = Tensor::create(gy.c, gy.h / 2, gy.w / 2, 0.0);
    for (int c = 0; c < gy.c; ++c) {
        const double* src = gy.plane_ptr(c);
        double* dst = gx.plane_ptr(c);
        for (int yy = 0; yy < gy.h; ++yy) {
            double* out = dst + static_cast<size_t>(yy / 2) * gx.w;
            const double* row = src + static_cast<size_t>(yy) * gy.w;
            for (int xx = 0; xx < gy.w; ++xx) out[xx / 2] += row[xx];
        }
    }
    return gx;
}

Tensor avgpool2(const Tensor& x) {
    check(x.h % 2 == 0 && x.w % 2 == 0, "avgpool2: extent must be even");
    Tensor y = Tensor::create(x.c, x.h / 2, x.w / 2);
    for (int c = 0; c < x.c; ++c) {
        const double* src = x.plane_ptr(c);
        double* dst = y.plane_ptr(c);
        for (int yy = 0; yy < y.h; ++yy)
            for (int xx = 0; xx < y.w; ++xx) {
                const double* r0 = src + static_cast<size_t>(2 * yy) * x.w + 2 * xx;
                const double* r1 = r0 + x.w;
                dst[static_cast<size_t>(yy) * y.w + xx] =
                    0.25 * (r0[0] + r0[1] + r1[0] + r1[1]);
            }
    }
    return y;
}

Tensor avgpool2_backward(const Tensor& gy, int in_h, int in_w) {
    Tensor gx = Tensor::create(gy.c, in_h, in_w, 0.0);
    for (int c = 0; c < gy.c; ++c) {
        const double* src = gy.plane_ptr(c);
        double* dst = gx.plane_ptr(c);
        for (int yy = 0; yy < gy.h; ++yy)
            for (int xx = 0; xx < gy.w; ++xx) {
                const double g = 0.25 * src[static_cast<size_t>(yy) * gy.w + xx];
                double* r0 = dst + static_cast<size_t>(2 * yy) * in_w + 2 * xx;
                double* r1 = r0 + in_w;
                r0[0] += g;
                r0[1] += g;
                r1[0] += g;
                r1[1] += g;
            }
    }
    return gx;
}

}  // namespace veil::net
