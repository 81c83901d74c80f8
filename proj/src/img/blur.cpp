#include "veil/img/blur.hpp"

#include <cmath>

#include "veil/kern/kernels.hpp"

namespace veil::img {

GaussianKernel GaussianKernel::make(double sigma, double sigma_max) {
    check_range(sigma > 0.0 && sigma <= sigma_max,
                "gaussian_psf_blur: sigma must satisfy 0 < sigma <= sigma_max");
    GaussianKernel k;
    k.sigma = sigma;
    k.radius = static_cast<int>(std::ceil(3.0 * sigma_max));
    const int n = 2 * k.radius + 1;
    k.taps.resize(n);
    double z = 0.0;
    for (int i = -k.radius; i <= k.radius; ++i) {
        const double g = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k.taps[i + k.radius] = g;
        z += g;
    }
    for (double& t : k.taps) t /= z;
    // d/dsigma of the renormalized taps: k_i * (i^2 - m2) / sigma^3 with
    // m2 the kernel's second moment.
    double m2 = 0.0;
    for (int i = -k.radius; i <= k.radius; ++i) m2 += k.taps[i + k.radius] * (i * i);
    k.dtaps.resize(n);
    const double s3 = sigma * sigma * sigma;
    for (int i = -k.radius; i <= k.radius; ++i)
        k.dtaps[i + k.radius] = k.taps[i + k.radius] * ((i * i) - m2) / s3;
    return k;
}

namespace {

// One horizontal pass over every row: dst[y][x] = sum_t taps[t]*src[y][reflect(x+t-r)].
void pass_rows(const double* src, double* dst, int h, int w, const std::vector<double>& taps,
               int radius) {
    const auto& k = kern::active();
    const int n_taps = 2 * radius + 1;
    std::vector<double> pad(static_cast<size_t>(w) + 2 * radius);
    for (int y = 0; y < h; ++y) {
        const double* row = src + static_cast<size_t>(y) * w;
        for (int j = 0; j < w + 2 * radius; ++j) pad[j] = row[reflect_index(j - radius, w)];
        k.fir_valid(pad.data(), dst + static_cast<size_t>(y) * w, w, taps.data(), n_taps);
    }
}

void pass_cols(const double* src, double* dst, int h, int w, const std::vector<double>& taps,
               int radius) {
    const auto& k = kern::active();
    const int n_taps = 2 * radius + 1;
    std::vector<double> pad(static_cast<size_t>(h) + 2 * radius);
    std::vector<double> out(static_cast<size_t>(h));
    for (int x = 0; x < w; ++x) {
        for (int j = 0; j < h + 2 * radius; ++j)
            pad[j] = src[static_cast<size_t>(reflect_index(j - radius, h)) * w + x];
        k.fir_valid(pad.data(), out.data(), h, taps.data(), n_taps);
        for (int y = 0; y < h; ++y) dst[static_cast<size_t>(y) * w + x] = out[y];
    }
}

// Adjoint of one reflect-padded FIR pass along a contiguous axis of length n:
// full correlation followed by folding padded positions back to their source.
void pass_adjoint_1d(const double* g, double* gx, int n, const std::vector<double>& taps,
                     int radius) {
    const auto& k = kern::active();
    const int n_taps = 2 * radius + 1;
    std::vector<double> gz(static_cast<size_t>(n) + 4 * radius, 0.0);
    for (int i = 0; i < n; ++i) gz[i + 2 * radius] = g[i];
    std::vector<double> gp(static_cast<size_t>(n) + 2 * radius);
    // taps are symmetric, so the flipped kernel equals the kernel itself
    k.fir_valid(gz.data(), gp.data(), n + 2 * radius, taps.data(), n_taps);
    for (int i = 0; i < n; ++i) gx[i] = 0.0;
    for (int j = 0; j < n + 2 * radius; ++j) gx[reflect_index(j - radius, n)] += gp[j];
}

void pass_rows_adjoint(const double* g, double* dst, int h, int w,
                       const std::vector<double>& taps, int radius) {
    std::vector<double> gx(static_cast<size_t>(w));
    for (int y = 0; y < h; ++y) {
        pass_adjoint_1d(g + static_cast<size_t>(y) * w, gx.data(), w, taps, radius);
        for (int x = 0; x < w; ++x) dst[static_cast<size_t>(y) * w + x] = gx[x];
    }
}

void pass_cols_adjoint(const double* g, double* dst, int h, int w,
                       const std::vector<double>& taps, int radius) {
    std::vector<double> col(static_cast<size_t>(h));
    std::vector<double> gx(static_cast<size_t>(h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) col[y] = g[static_cast<size_t>(y) * w + x];
        pass_adjoint_1d(col.data(), gx.data(), h, taps, radius);
        for (int y = 0; y < h; ++y) dst[static_cast<size_t>(y) * w + x] = gx[y];
    }
}

}  // namespace

void blur_plane(const double* src, double* dst, int h, int w, const std::vector<double>& taps,
                int radius) {
    std::vector<double> tmp(static_cast<size_t>(h) * w);
    pass_rows(src, tmp.data(), h, w, taps, radius);
    pass_cols(tmp.data(), dst, h, w, taps, radius);
}

Image gaussian_psf_blur(const Image& image, double sigma, double sigma_max) {
    check(!image.empty(), "gaussian_psf_blur: empty image");
    const GaussianKernel k = GaussianKernel::make(sigma, sigma_max);
    Image out = image;
    for (int c = 0; c < image.channels; ++c)
        blur_plane(image.plane_ptr(c), out.plane_ptr(c), image.height, image.width, k.taps,
                   k.radius);
    return out;
}

Map2D gaussian_blur(const Map2D& m, double sigma, double sigma_max) {
    const GaussianKernel k = GaussianKernel::make(sigma, sigma_max);
    Map2D out = m;
    blur_plane(m.v.data(), out.v.data(), m.height, m.width, k.taps, k.radius);
    return out;
}

namespace {

// d/dsigma of cols(rows(x)) = cols'(rows(x)) + cols(rows'(x)).
void blur_plane_dsigma(const double* src, double* dst, int h, int w, const GaussianKernel& k) {
    std::vector<double> t1(static_cast<size_t>(h) * w);
    std::vector<double> t2(static_cast<size_t>(h) * w);
    pass_rows(src, t1.data(), h, w, k.taps, k.radius);
    pass_cols(t1.data(), dst, h, w, k.dtaps, k.radius);
    pass_rows(src, t1.data(), h, w, k.dtaps, k.radius);
    pass_cols(t1.data(), t2.data(), h, w, k.taps, k.radius);
    kern::active().axpy(1.0, t2.data(), dst, static_cast<size_t>(h) * w);
}

}  // namespace

Image gaussian_psf_blur_dsigma(const Image& image, double sigma, double sigma_max) {
    const GaussianKernel k = GaussianKernel::make(sigma, sigma_max);
    Image out = image;
    for (int c = 0; c < image.channels; ++c)
        blur_plane_dsigma(image.plane_ptr(c), out.plane_ptr(c), image.height, image.width, k);
    return out;
}

Map2D gaussian_blur_dsigma(const Map2D& m, double sigma, double sigma_max) {
    const GaussianKernel k = GaussianKernel::make(sigma, sigma_max);
    Map2D out = m;
    blur_plane_dsigma(m.v.data(), out.v.data(), m.height, m.width, k);
    return out;
}

Image gaussian_psf_blur_adjoint(const Image& gout, double sigma, double sigma_max) {
    const GaussianKernel k = GaussianKernel::make(sigma, sigma_max);
    Image out = gout;
    std::vector<double> tmp(gout.plane());
    for (int c = 0; c < gout.channels; ++c) {
        pass_cols_adjoint(gout.plane_ptr(c), tmp.data(), gout.height, gout.width, k.taps,
                          k.radius);
        pass_rows_adjoint(tmp.data(), out.plane_ptr(c), gout.height, gout.width, k.taps,
                          k.radius);
    }
    return out;
}

}  // namespace veil::img
