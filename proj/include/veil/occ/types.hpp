#pragma once

#include <array>
#include <string>
#include <vector>

#include "veil/img/image.hpp"

namespace veil::occ {

enum class OcclusionKind { drop, dirt, overlay, gaussian, refract };

OcclusionKind kind_from_string(const std::string& s);
std::string kind_to_string(OcclusionKind k);

// One occluder. The boundary is radius * (1 + a1*sin(th+phi1) + a2*sin(2*th+phi2))
// plus a banded noise profile scaled by radius.
struct DropSpec {
    double center_u = 0.0;
    double center_v = 0.0;
    double radius = 0.0;
    double a1 = 0.0, phi1 = 0.0;
    double a2 = 0.0, phi2 = 0.0;
    std::vector<double> noise;  // relative amplitudes in [-eps, eps], empty = none
    double thickness_rho = 1.0;

    // Boundary radius at angle theta.
    double boundary(double theta) const;
    // Hard support indicator at pixel center (x, y).
    double support(double y, double x) const;
    // Upper bound of the boundary radius; bounding boxes use it.
    double max_radius() const;
};

// The stochastic realization z: a deterministic function of (seed, config).
struct DropField {
    std::vector<DropSpec> drops;
    uint64_t seed = 0;
    int height = 0;
    int width = 0;
};

// The regressable parameter set w. Overlays carry no parameters.
struct PhysicalParams {
    OcclusionKind kind = OcclusionKind::drop;
    double sigma = 2.0;  // defocus std, pixels

    void validate(double sigma_max) const;
};

// Per-pixel refraction offsets plus thickness; zero outside drop supports.
struct DisplacementMap {
    img::Map2D u_off;
    img::Map2D v_off;
    img::Map2D rho;
};

using AlphaMap = img::Map2D;  // 1 = scene fully visible, 0 = fully occluded

struct OcclusionRender {
    img::Image occ;
    AlphaMap alpha;
};

// Forward-mode sigma tangents of a render, for parameter estimation.
struct RenderTangent {
    img::Image occ_dsigma;
    img::Map2D alpha_dsigma;
};

struct OcclusionConfig {
    OcclusionKind kind = OcclusionKind::drop;
    double p_r = 0.5;
    double r_min = 3.0;
    double r_max = 6.0;
    double magnification = 1.5;
    double rho_min = 0.6;
    double rho_max = 1.0;
    double sigma_max = 12.0;
    double shape_amp_max = 0.2;
    double shape_noise = 0.05;
    // dirt color box (RGB lo/hi), defaults brownish
    std::array<double, 3> color_lo{0.25, 0.15, 0.05};
    std::array<double, 3> color_hi{0.50, 0.32, 0.16};
    // overlay
    std::string overlay_path;
    std::string overlay_alpha_path;
    // gaussian ablation
    double gauss_peak = 0.85;
    double gauss_width = 0.5;  // opacity std = gauss_width * radius

    void validate(int height, int width) const;
};

}  // namespace veil::occ
