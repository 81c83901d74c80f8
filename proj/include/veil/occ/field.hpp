#pragma once

#include <optional>

#include "veil/occ/types.hpp"

namespace veil::occ {

// Cell-tiled placement: the image is tiled into square cells whose side is the
// maximum drop diameter; each cell spawns one drop with probability p_r at a
// uniform position inside it. Drops whose center falls outside allowed_mask
// (values >= 0.5 allow) are discarded. Deterministic given (seed, config).
DropField sample_drop_field(uint64_t seed, int height, int width, const OcclusionConfig& cfg,
                            const img::Map2D* allowed_mask = nullptr);

}  // namespace veil::occ
