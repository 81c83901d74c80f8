#pragma once

#include "veil/pipe/config.hpp"

namespace veil::pipe {

// Procedural scene: smooth gradient background plus random opaque shapes.
img::Image make_scene(int height, int width, uint64_t seed);

// Style transforms creating the synthetic domain shift. "affine_vgrad" applies
// a channel-wise affine shift plus a vertical luminance ramp; "affine_tophalf"
// applies the affine shift to the top half only; "none" is identity.
img::Image apply_style(const img::Image& x, const std::string& style_id, double strength);

// Emits source/, target/, gt_style/, gt_masks/, eval_source/, eval_target/
// directories with manifests (newline-separated relative paths) and meta.json
// (spec echo plus per-image field seeds). Bitwise deterministic given the spec.
void make_synthetic_dataset(const Config& cfg, const std::string& out_root);

// Manifest helpers.
std::vector<std::string> load_manifest(const std::string& root, const std::string& manifest);
std::vector<img::Image> load_images(const std::vector<std::string>& paths);
std::vector<img::Image> load_dataset(const std::string& root, const std::string& manifest,
                                     int limit = -1);

// Per-eval-image drop field seed recorded in meta.json.
uint64_t eval_field_seed(uint64_t dataset_seed, int index);

}  // namespace veil::pipe
