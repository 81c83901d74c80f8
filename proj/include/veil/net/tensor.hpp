#pragma once

#include <vector>

#include "veil/img/image.hpp"

namespace veil::net {

// Planar CHW activation/feature tensor (single sample; batching is a loop).
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> data;

    static Tensor create(int c, int h, int w, double fill = 0.0);
    static Tensor from_image(const img::Image& im);
    img::Image to_image() const;

    size_t size() const { return data.size(); }
    size_t plane() const { return static_cast<size_t>(h) * w; }
    double* plane_ptr(int ci) { return data.data() + static_cast<size_t>(ci) * plane(); }
    const double* plane_ptr(int ci) const {
        return data.data() + static_cast<size_t>(ci) * plane();
    }
    double& at(int ci, int y, int x) {
        return data[(static_cast<size_t>(ci) * h + y) * w + x];
    }
    double at(int ci, int y, int x) const {
        return data[(static_cast<size_t>(ci) * h + y) * w + x];
    }
    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
};

// Appends two normalized coordinate channels (u and v in [-0.5, 0.5]); gives
// the convolutional stacks access to absolute position, which both the
// spatially varying styles and the guidance maps depend on.
Tensor with_coord_channels(const Tensor& x);

}  // namespace veil::net
