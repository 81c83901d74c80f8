#pragma once

#include "veil/img/image.hpp"

namespace veil::img {

// Truncated, renormalized Gaussian. The window radius depends only on
// sigma_max so the taps (and the blur output) are smooth functions of sigma.
struct GaussianKernel {
    double sigma = 0.0;
    int radius = 0;
    std::vector<double> taps;   // 2*radius+1, sums to 1
    std::vector<double> dtaps;  // d taps / d sigma

    static GaussianKernel make(double sigma, double sigma_max);
};

// Symmetric reflection (edge pixel included), valid for arbitrary out-of-range
// indices.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

// Separable blur of one plane (rows then columns), reflective borders.
void blur_plane(const double* src, double* dst, int h, int w, const std::vector<double>& taps,
                int radius);

Image gaussian_psf_blur(const Image& image, double sigma, double sigma_max);
Map2D gaussian_blur(const Map2D& m, double sigma, double sigma_max);

// Forward-mode tangent: d blur(image, sigma) / d sigma.
Image gaussian_psf_blur_dsigma(const Image& image, double sigma, double sigma_max);
Map2D gaussian_blur_dsigma(const Map2D& m, double sigma, double sigma_max);

// Reverse-mode: adjoint of the blur operator applied to an upstream gradient.
Image gaussian_psf_blur_adjoint(const Image& gout, double sigma, double sigma_max);

}  // namespace veil::img
