#include "veil/net/tensor.hpp"

namespace veil::net {

Tensor Tensor::create(int c, int h, int w, double fill) {
    check(c > 0 && h > 0 && w > 0, "Tensor: non-degenerate shape required");
    Tensor t;
    t.c = c;
    t.h = h;
    t.w = w;
    t.data.assign(static_cast<size_t>(c) * h * w, fill);
    return t;
}

Tensor Tensor::from_image(const img::Image& im) {
    Tensor t;
    t.c = im.channels;
    t.h = im.height;
    t.w = im.width;
    t.data = im.data;
    return t;
}

img::Image Tensor::to_image() const {
    img::Image im = img::Image::create(h, w, c);
    im.data = data;
    return im;
}

Tensor with_coord_channels(const Tensor& x) {
    Tensor out = Tensor::create(x.c + 2, x.h, x.w);
    std::copy(x.data.begin(), x.data.end(), out.data.begin());
    double* uu = out.plane_ptr(x.c);
    double* vv = out.plane_ptr(x.c + 1);
    size_t i = 0;
    for (int y = 0; y < x.h; ++y)
        for (int xx = 0; xx < x.w; ++xx, ++i) {
            uu[i] = x.w > 1 ? xx / double(x.w - 1) - 0.5 : 0.0;
            vv[i] = x.h > 1 ? y / double(x.h - 1) - 0.5 : 0.0;
        }
    return out;
}

}  // namespace veil::net
