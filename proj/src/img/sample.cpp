#include "veil/img/sample.hpp"

#include <algorithm>
#include <cmath>

namespace veil::img {

namespace {

struct Tap {
    int x0, x1, y0, y1;
    double fx, fy;
    bool u_clamped, v_clamped;
};

inline Tap make_tap(double u, double v, int w, int h) {
    Tap t;
    const double cu = std::clamp(u, 0.0, static_cast<double>(w - 1));
    const double cv = std::clamp(v, 0.0, static_cast<double>(h - 1));
    t.u_clamped = cu != u;
    t.v_clamped = cv != v;
    t.x0 = static_cast<int>(std::floor(cu));
    t.y0 = static_cast<int>(std::floor(cv));
    if (t.x0 > w - 2) t.x0 = w - 2 < 0 ? 0 : w - 2;
    if (t.y0 > h - 2) t.y0 = h - 2 < 0 ? 0 : h - 2;
    t.x1 = std::min(t.x0 + 1, w - 1);
    t.y1 = std::min(t.y0 + 1, h - 1);
    t.fx = cu - t.x0;
    t.fy = cv - t.y0;
    return t;
}

}  // namespace

Image bilinear_sample(const Image& image, const Coords& coords) {
    check(!image.empty(), "bilinear_sample: empty image");
    check(coords.u.size() == coords.v.size() &&
              coords.u.size() == static_cast<size_t>(coords.height) * coords.width,
          "bilinear_sample: coords extent mismatch");
    Image out = Image::create(coords.height, coords.width, image.channels);
    const int w = image.width, h = image.height;
    const size_t n = coords.size();
    for (size_t i = 0; i < n; ++i) {
        const Tap t = make_tap(coords.u[i], coords.v[i], w, h);
        for (int c = 0; c < image.channels; ++c) {
            const double* p = image.plane_ptr(c);
            const double v00 = p[static_cast<size_t>(t.y0) * w + t.x0];
            const double v01 = p[static_cast<size_t>(t.y0) * w + t.x1];
            const double v10 = p[static_cast<size_t>(t.y1) * w + t.x0];
            const double v11 = p[static_cast<size_t>(t.y1) * w + t.x1];
            const double top = v00 + t.fx * (v01 - v00);
            const double bot = v10 + t.fx * (v11 - v10);
            out.plane_ptr(c)[i] = top + t.fy * (bot - top);
        }
    }
    return out;
}

void bilinear_sample_vjp(const Image& image, const Coords& coords, const Image& gout,
                         Image* grad_image, Coords* grad_coords) {
    check(gout.height == coords.height && gout.width == coords.width &&
              gout.channels == image.channels,
          "bilinear_sample_vjp: gradient extent mismatch");
    const int w = image.width, h = image.height;
    const size_t n = coords.size();
    for (size_t i = 0; i < n; ++i) {
        const Tap t = make_tap(coords.u[i], coords.v[i], w, h);
        double du = 0.0, dv = 0.0;
        for (int c = 0; c < image.channels; ++c) {
            const double g = gout.plane_ptr(c)[i];
            if (g == 0.0) continue;
            if (grad_image) {
                double* gp = grad_image->plane_ptr(c);
                gp[static_cast<size_t>(t.y0) * w + t.x0] += g * (1 - t.fx) * (1 - t.fy);
                gp[static_cast<size_t>(t.y0) * w + t.x1] += g * t.fx * (1 - t.fy);
                gp[static_cast<size_t>(t.y1) * w + t.x0] += g * (1 - t.fx) * t.fy;
                gp[static_cast<size_t>(t.y1) * w + t.x1] += g * t.fx * t.fy;
            }
            if (grad_coords) {
                const double* p = image.plane_ptr(c);
                const double v00 = p[static_cast<size_t>(t.y0) * w + t.x0];
                const double v01 = p[static_cast<size_t>(t.y0) * w + t.x1];
                const double v10 = p[static_cast<size_t>(t.y1) * w + t.x0];
                const double v11 = p[static_cast<size_t>(t.y1) * w + t.x1];
                du += g * ((1 - t.fy) * (v01 - v00) + t.fy * (v11 - v10));
                dv += g * ((1 - t.fx) * (v10 - v00) + t.fx * (v11 - v01));
            }
        }
        if (grad_coords) {
            grad_coords->u[i] += t.u_clamped ? 0.0 : du;
            grad_coords->v[i] += t.v_clamped ? 0.0 : dv;
        }
    }
}

}  // namespace veil::img
