#include "veil/img/image.hpp"

#include <algorithm>
#include <cmath>

#include "veil/kern/kernels.hpp"

namespace veil::img {

Image Image::create(int height, int width, int channels, double fill) {
    check(height >= kMinExtent && width >= kMinExtent,
          "Image: extent below minimum of 8 px");
    check(channels == 1 || channels == 3, "Image: channels must be 1 or 3");
    Image out;
    out.height = height;
    out.width = width;
    out.channels = channels;
    out.data.assign(static_cast<size_t>(height) * width * channels, fill);
    return out;
}

void Image::clamp01() {
    for (double& x : data) x = std::clamp(x, 0.0, 1.0);
}

Map2D Map2D::create(int height, int width, double fill) {
    check(height > 0 && width > 0, "Map2D: non-degenerate extent required");
    Map2D out;
    out.height = height;
    out.width = width;
    out.v.assign(static_cast<size_t>(height) * width, fill);
    return out;
}

Coords Coords::identity(int height, int width) {
    Coords c;
    c.height = height;
    c.width = width;
    c.u.resize(static_cast<size_t>(height) * width);
    c.v.resize(c.u.size());
    size_t i = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x, ++i) {
            c.u[i] = x;
            c.v[i] = y;
        }
    return c;
}

double mean(const Map2D& m) {
    if (m.v.empty()) return 0.0;
    return kern::active().sum(m.v.data(), m.v.size()) / static_cast<double>(m.v.size());
}

double mean_abs_diff(const Image& a, const Image& b) {
    check(a.same_extent(b), "mean_abs_diff: extent mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) acc += std::abs(a.data[i] - b.data[i]);
    return acc / static_cast<double>(a.data.size());
}

}  // namespace veil::img
