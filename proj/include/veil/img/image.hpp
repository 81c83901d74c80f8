#pragma once

#include <cstddef>
#include <vector>

#include "veil/core/common.hpp"

namespace veil::img {

constexpr int kMinExtent = 8;

// Planar (channel-major) raster with values nominally in [0,1].
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    static Image create(int height, int width, int channels, double fill = 0.0);

    bool empty() const { return data.empty(); }
    size_t plane() const { return static_cast<size_t>(height) * width; }

    double& at(int c, int y, int x) { return data[(static_cast<size_t>(c) * height + y) * width + x]; }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    double* plane_ptr(int c) { return data.data() + static_cast<size_t>(c) * plane(); }
    const double* plane_ptr(int c) const { return data.data() + static_cast<size_t>(c) * plane(); }

    bool same_extent(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    void clamp01();
};

// Single-plane grid without the Image size invariant; used for alpha maps,
// guidance maps, masks and heatmaps.
struct Map2D {
    int height = 0;
    int width = 0;
    std::vector<double> v;

    static Map2D create(int height, int width, double fill = 0.0);

    size_t size() const { return v.size(); }
    double& at(int y, int x) { return v[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return v[static_cast<size_t>(y) * width + x]; }
    bool same_extent(const Map2D& o) const { return height == o.height && width == o.width; }
};

// Per-pixel sample coordinates in pixel units, origin at the top-left corner:
// u selects the column, v the row.
struct Coords {
    int height = 0;
    int width = 0;
    std::vector<double> u;
    std::vector<double> v;

    static Coords identity(int height, int width);
    size_t size() const { return u.size(); }
};

double mean(const Map2D& m);
double mean_abs_diff(const Image& a, const Image& b);

}  // namespace veil::img
