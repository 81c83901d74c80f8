#include "veil/guide/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace veil::guide {

img::Map2D resize_bilinear(const img::Map2D& src, int out_h, int out_w) {
    img::Map2D out = img::Map2D::create(out_h, out_w);
    const double sy = out_h > 1 ? double(src.height - 1) / (out_h - 1) : 0.0;
    const double sx = out_w > 1 ? double(src.width - 1) / (out_w - 1) : 0.0;
    for (int y = 0; y < out_h; ++y) {
        const double fy = y * sy;
        const int y0 = std::min(src.height - 1, static_cast<int>(fy));
        const int y1 = std::min(src.height - 1, y0 + 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = x * sx;
            const int x0 = std::min(src.width - 1, static_cast<int>(fx));
            const int x1 = std::min(src.width - 1, x0 + 1);
            const double wx = fx - x0;
            const double top = src.at(y0, x0) + wx * (src.at(y0, x1) - src.at(y0, x0));
            const double bot = src.at(y1, x0) + wx * (src.at(y1, x1) - src.at(y1, x0));
            out.at(y, x) = top + wy * (bot - top);
        }
    }
    return out;
}

void minmax_normalize(img::Map2D& m) {
    const auto [lo_it, hi_it] = std::minmax_element(m.v.begin(), m.v.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi - lo < 1e-12) {
        std::fill(m.v.begin(), m.v.end(), 0.0);
        return;
    }
    const double inv = 1.0 / (hi - lo);
    for (double& v : m.v) v = (v - lo) * inv;
}

img::Map2D gradcam_layer(net::Discriminator& d, const img::Image& x,
                         const std::string& layer_id) {
    d.forward(net::Tensor::from_image(x));
    const net::Tensor& act = d.activation(layer_id);
    // fake-class response: -mean(score map) of the layer's own scale
    const net::Tensor grad = d.score_gradient_at(layer_id, -1.0);

    img::Map2D heat = img::Map2D::create(act.h, act.w, 0.0);
    const size_t hw = act.plane();
    for (int c = 0; c < act.c; ++c) {
        const double* g = grad.plane_ptr(c);
        double wc = 0.0;
        for (size_t i = 0; i < hw; ++i) wc += g[i];
        wc /= static_cast<double>(hw);
        const double* a = act.plane_ptr(c);
        for (size_t i = 0; i < hw; ++i) heat.v[i] += wc * a[i];
    }
    for (double& v : heat.v) v = std::max(0.0, v);
    return resize_bilinear(heat, x.height, x.width);
}

GuidanceMap compute_dg(net::Discriminator& d, const std::vector<img::Image>& dataset) {
    check(!dataset.empty(), "compute_dg: empty dataset");
    const int h = dataset.front().height, w = dataset.front().width;
    for (const auto& im : dataset)
        check(im.height == h && im.width == w, "compute_dg: dataset images must share extent");

    const auto& layers = d.layer_registry();
    img::Map2D acc = img::Map2D::create(h, w, 0.0);
    uint64_t data_hash = 0xcbf29ce484222325ull;
    for (const img::Image& x : dataset) {
        img::Map2D per_image = img::Map2D::create(h, w, 0.0);
        for (const std::string& layer : layers) {
            img::Map2D heat = gradcam_layer(d, x, layer);
            minmax_normalize(heat);
            for (size_t i = 0; i < per_image.v.size(); ++i) per_image.v[i] += heat.v[i];
        }
        const double inv = 1.0 / static_cast<double>(layers.size());
        for (size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += per_image.v[i] * inv;
        data_hash = fnv1a(x.data, data_hash);
    }
    for (double& v : acc.v) v /= static_cast<double>(dataset.size());
    minmax_normalize(acc);

    GuidanceMap out;
    out.dg = std::move(acc);
    out.provenance = to_hex(d.param_hash() ^ data_hash);
    return out;
}

img::Map2D injection_mask_map(const img::Map2D& dg, double beta) {
    check_range(beta >= 0.0 && beta <= 1.0, "injection_mask: beta outside [0,1]");
    img::Map2D mask = dg;
    for (size_t i = 0; i < dg.v.size(); ++i) mask.v[i] = dg.v[i] < beta ? 1.0 : 0.0;
    return mask;
}

InjectionMask injection_mask(const GuidanceMap& dg, double beta) {
    return InjectionMask{injection_mask_map(dg.dg, beta), beta};
}

namespace {
constexpr char kDgMagic[8] = {'V', 'E', 'I', 'L', 'D', 'G', '0', '1'};
}

void save_dg(const std::string& path, const img::Map2D& dg) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot write guidance map: " + path);
    std::fwrite(kDgMagic, 1, 8, f);
    const uint32_t h = static_cast<uint32_t>(dg.height);
    const uint32_t w = static_cast<uint32_t>(dg.width);
    std::fwrite(&h, 4, 1, f);
    std::fwrite(&w, 4, 1, f);
    std::vector<float> buf(dg.v.begin(), dg.v.end());
    std::fwrite(buf.data(), sizeof(float), buf.size(), f);
    if (std::fclose(f) != 0) throw IoError("guidance map write failed: " + path);
}

img::Map2D load_dg(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot read guidance map: " + path);
    char magic[8];
    uint32_t h = 0, w = 0;
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kDgMagic, 8) != 0 ||
        std::fread(&h, 4, 1, f) != 1 || std::fread(&w, 4, 1, f) != 1) {
        std::fclose(f);
        throw IoError("not a guidance map file: " + path);
    }
    std::vector<float> buf(static_cast<size_t>(h) * w);
    if (std::fread(buf.data(), sizeof(float), buf.size(), f) != buf.size()) {
        std::fclose(f);
        throw IoError("truncated guidance map: " + path);
    }
    std::fclose(f);
    img::Map2D out = img::Map2D::create(static_cast<int>(h), static_cast<int>(w));
    std::copy(buf.begin(), buf.end(), out.v.begin());
    return out;
}

}  // namespace veil::guide
