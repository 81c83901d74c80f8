#pragma once

#include "veil/img/sample.hpp"
#include "veil/occ/types.hpp"

namespace veil::occ {

// Refraction offsets: a pixel at offset d from its drop center samples the
// scene at center - m*d (inverted magnified neighborhood), scaled per pixel by
// the drop thickness rho. Later drops in the list win where supports overlap.
DisplacementMap drop_displacement(const DropField& field, int height, int width,
                                  double magnification);

// Sampling coordinates realizing Eq-style (u + U*rho, v + V*rho) remapping.
img::Coords displacement_coords(const DisplacementMap& disp);

// Raindrops: displaced scene, defocused by a Gaussian PSF of std sigma; alpha
// is the product over drops of (1 - blurred support). Optional forward-mode
// sigma tangent.
OcclusionRender render_raindrops(const img::Image& scene, const DropField& field,
                                 const PhysicalParams& params, const OcclusionConfig& cfg,
                                 RenderTangent* tangent = nullptr);

// Opaque flat-colored blobs, semi-transparent only through defocus. No scene
// sampling and no displacement.
OcclusionRender render_dirt(const img::Image& scene, const DropField& field,
                            const PhysicalParams& params, const OcclusionConfig& cfg,
                            RenderTangent* tangent = nullptr);

// Alpha-blended layer (watermark, fence, ...) shifted by an integer
// translation; nothing is regressed (w is empty).
OcclusionRender render_overlay(const img::Image& scene, const img::Image& overlay,
                               const img::Map2D& overlay_alpha, int du, int dv);

// Ablation model: scene-independent Gaussian-shaped opacity per drop.
OcclusionRender render_gaussian_ablation(const img::Image& scene, const DropField& field,
                                         const OcclusionConfig& cfg);

// Kind dispatcher used by training and the CLI. `seed` feeds overlay translation.
OcclusionRender render_occlusions(const img::Image& scene, const DropField& field,
                                  const PhysicalParams& params, const OcclusionConfig& cfg,
                                  uint64_t seed, RenderTangent* tangent = nullptr);

// y_d = alpha * scene + (1 - alpha) * occ, per pixel and channel.
img::Image composite(const img::Image& scene, const OcclusionRender& render);

// Sigma tangent of composite(scene, render) given the render tangents.
img::Image composite_dsigma(const img::Image& scene, const OcclusionRender& render,
                            const RenderTangent& tangent);

// Gradient of composite(scene, render_raindrops(scene, ...)) with respect to
// the scene, for an upstream gradient g_yd. Covers both the direct alpha path
// and the sampled+blurred occluder path.
img::Image composite_raindrops_scene_vjp(const img::Image& scene, const img::Coords& coords,
                                         const img::Map2D& alpha, double sigma,
                                         double sigma_max, const img::Image& g_yd);

}  // namespace veil::occ
