#include "veil/occ/types.hpp"

#include <cmath>

namespace veil::occ {

OcclusionKind kind_from_string(const std::string& s) {
    if (s == "drop") return OcclusionKind::drop;
    if (s == "dirt") return OcclusionKind::dirt;
    if (s == "overlay") return OcclusionKind::overlay;
    if (s == "gaussian") return OcclusionKind::gaussian;
    if (s == "refract") return OcclusionKind::refract;
    throw RangeError("unknown occlusion kind: " + s);
}

std::string kind_to_string(OcclusionKind k) {
    switch (k) {
        case OcclusionKind::drop: return "drop";
        case OcclusionKind::dirt: return "dirt";
        case OcclusionKind::overlay: return "overlay";
        case OcclusionKind::gaussian: return "gaussian";
        case OcclusionKind::refract: return "refract";
    }
    return "drop";
}

double DropSpec::boundary(double theta) const {
    double r = 1.0 + a1 * std::sin(theta + phi1) + a2 * std::sin(2.0 * theta + phi2);
    if (!noise.empty()) {
        const double two_pi = 2.0 * M_PI;
        double t = theta / two_pi;
        t -= std::floor(t);
        const double pos = t * static_cast<double>(noise.size());
        const size_t i0 = static_cast<size_t>(pos) % noise.size();
        const size_t i1 = (i0 + 1) % noise.size();
        const double f = pos - std::floor(pos);
        r += noise[i0] * (1.0 - f) + noise[i1] * f;
    }
    return radius * r;
}

double DropSpec::support(double y, double x) const {
    const double du = x - center_u;
    const double dv = y - center_v;
    const double d = std::sqrt(du * du + dv * dv);
    if (d == 0.0) return 1.0;
    return d <= boundary(std::atan2(dv, du)) ? 1.0 : 0.0;
}

double DropSpec::max_radius() const {
    double eps = 0.0;
    for (double n : noise) eps = std::max(eps, std::abs(n));
    return radius * (1.0 + a1 + a2 + eps);
}

void PhysicalParams::validate(double sigma_max) const {
    if (kind == OcclusionKind::overlay) return;  // w is empty for overlays
    check_range(sigma > 0.0 && sigma <= sigma_max,
                "PhysicalParams: sigma must satisfy 0 < sigma <= sigma_max");
}

void OcclusionConfig::validate(int height, int width) const {
    check_range(p_r >= 0.0 && p_r <= 1.0, "occlusion: p_r must lie in [0,1]");
    const double lim = 0.5 * std::min(height, width);
    check_range(r_min > 0.0 && r_min <= r_max && r_max < lim,
                "occlusion: size range must lie within (0, min(H,W)/2)");
    check_range(sigma_max > 0.0, "occlusion: sigma_max must be positive");
    check_range(rho_min > 0.0 && rho_min <= rho_max && rho_max <= 1.0,
                "occlusion: rho range must lie within (0,1]");
}

}  // namespace veil::occ
