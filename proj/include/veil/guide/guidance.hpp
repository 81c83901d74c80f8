#pragma once

#include "veil/net/discriminator.hpp"

namespace veil::guide {

// GradCAM response of one discriminator layer for input x, upscaled to the
// input extent. The target scalar is the fake-class response (the negated mean
// of the layer's own scale score map); channel weights are the spatial means
// of its gradient, and the heatmap is the rectified weighted activation sum.
img::Map2D gradcam_layer(net::Discriminator& d, const img::Image& x,
                         const std::string& layer_id);

struct GuidanceMap {
    img::Map2D dg;            // in [0,1] after min-max normalization
    std::string provenance;   // discriminator + dataset hash
};

// Disentanglement Guidance: per-layer heatmaps are min-max normalized per
// image, averaged over layers, then over the dataset, then normalized again.
// Degenerate (constant) maps normalize to all-zeros.
GuidanceMap compute_dg(net::Discriminator& d, const std::vector<img::Image>& dataset);

struct InjectionMask {
    img::Map2D mask;  // 1 where DG < beta (injection allowed)
    double beta;
};

InjectionMask injection_mask(const GuidanceMap& dg, double beta);
img::Map2D injection_mask_map(const img::Map2D& dg, double beta);

// dg.bin: 16-byte header (8-byte magic, u32 height, u32 width, little-endian)
// followed by height*width float32 values.
void save_dg(const std::string& path, const img::Map2D& dg);
img::Map2D load_dg(const std::string& path);

// Bilinear resize used for heatmap upscaling (align-corners sampling).
img::Map2D resize_bilinear(const img::Map2D& src, int out_h, int out_w);

// Min-max normalization to [0,1]; constant maps go to all-zeros.
void minmax_normalize(img::Map2D& m);

}  // namespace veil::guide
