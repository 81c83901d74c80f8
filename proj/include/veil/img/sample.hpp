#pragma once

#include "veil/img/image.hpp"

namespace veil::img {

// Bilinear interpolation of `image` at per-pixel coordinates. Output extent is
// the coords extent; out-of-bounds coordinates clamp to the border.
Image bilinear_sample(const Image& image, const Coords& coords);

// Reverse-mode products: accumulates d<gout, sample>/d(image) into grad_image
// (same extent as image, pre-zeroed by caller or freshly created) and the
// coordinate gradients into grad_coords when non-null. Clamped coordinates
// receive zero coordinate gradient.
void bilinear_sample_vjp(const Image& image, const Coords& coords, const Image& gout,
                         Image* grad_image, Coords* grad_coords);

}  // namespace veil::img
