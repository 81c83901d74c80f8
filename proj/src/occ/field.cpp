#include "veil/occ/field.hpp"

#include <cmath>

namespace veil::occ {

namespace {
constexpr int kNoiseBins = 64;
}

DropField sample_drop_field(uint64_t seed, int height, int width, const OcclusionConfig& cfg,
                            const img::Map2D* allowed_mask) {
    cfg.validate(height, width);
    if (allowed_mask)
        check(allowed_mask->height == height && allowed_mask->width == width,
              "sample_drop_field: allowed_mask extent mismatch");

    DropField field;
    field.seed = seed;
    field.height = height;
    field.width = width;

    const bool fixed_shape = cfg.kind == OcclusionKind::refract;
    const int side = std::max(1, static_cast<int>(std::ceil(2.0 * cfg.r_max)));
    const int ny = (height + side - 1) / side;
    const int nx = (width + side - 1) / side;

    Rng rng(seed);
    for (int cy = 0; cy < ny; ++cy) {
        for (int cx = 0; cx < nx; ++cx) {
            if (rng.uniform() >= cfg.p_r) continue;
            DropSpec d;
            const double x0 = cx * side;
            const double y0 = cy * side;
            d.center_u = x0 + rng.uniform() * std::min<double>(side, width - x0);
            d.center_v = y0 + rng.uniform() * std::min<double>(side, height - y0);
            d.radius = rng.uniform(cfg.r_min, cfg.r_max);
            if (fixed_shape) {
                d.thickness_rho = 1.0;
            } else {
                d.a1 = rng.uniform(0.0, cfg.shape_amp_max);
                d.phi1 = rng.uniform(0.0, 2.0 * M_PI);
                d.a2 = rng.uniform(0.0, cfg.shape_amp_max);
                d.phi2 = rng.uniform(0.0, 2.0 * M_PI);
                if (cfg.shape_noise > 0.0) {
                    d.noise.resize(kNoiseBins);
                    for (double& n : d.noise) n = rng.uniform(-cfg.shape_noise, cfg.shape_noise);
                }
                d.thickness_rho = rng.uniform(cfg.rho_min, cfg.rho_max);
            }
            if (allowed_mask) {
                const int mu = std::min(width - 1, std::max(0, static_cast<int>(std::lround(d.center_u))));
                const int mv = std::min(height - 1, std::max(0, static_cast<int>(std::lround(d.center_v))));
                if (allowed_mask->at(mv, mu) < 0.5) continue;
            }
            field.drops.push_back(std::move(d));
        }
    }
    return field;
}

}  // namespace veil::occ
