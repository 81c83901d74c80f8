#pragma once

#include "veil/net/discriminator.hpp"
#include "veil/occ/render.hpp"

namespace veil::est {

// softplus reparameterization keeps the optimized sigma positive
inline double softplus(double s) { return s > 30.0 ? s : std::log1p(std::exp(s)); }
inline double softplus_inv(double x) { return x > 30.0 ? x : std::log(std::expm1(x)); }
inline double softplus_grad(double s) { return 1.0 / (1.0 + std::exp(-s)); }

struct EstimationConfig {
    double init_sigma = 2.0;
    int steps = 120;
    double step_size = 0.05;
    int batch = 4;
    uint64_t seed = 1;
    bool adaptive = true;  // scalar Adam on the reparameterized variable
};

struct EstimationTrace {
    std::vector<std::pair<double, double>> history;  // per-step (sigma, loss)
    double final_sigma = 0.0;
    bool aborted_non_finite = false;
};

// Adversarial regression of the defocus parameter against a frozen entangled
// discriminator: descend L_G(y_p) with y_p = composite(x, O(x, w, z)) and a
// fresh noise realization z each step. Only the reparameterized sigma moves;
// the discriminator is hash-checked to be bitwise unchanged.
EstimationTrace estimate_parameters(net::Discriminator& d_ent,
                                    const std::vector<img::Image>& source_set,
                                    occ::OcclusionKind kind,
                                    const occ::OcclusionConfig& occ_cfg,
                                    const EstimationConfig& cfg);

struct PhotometricPair {
    const img::Image* clear;
    const img::Image* occluded;
    const occ::DropField* field;
};

struct PhotometricFit {
    double sigma = 0.0;
    std::vector<std::pair<double, double>> history;
};

// L2 fit of sigma on paired clear/occluded images sharing a known drop field;
// the independent photometric route used to cross-check the adversarial one.
PhotometricFit fit_sigma_photometric(const std::vector<PhotometricPair>& pairs,
                                     const occ::OcclusionConfig& cfg, double init_sigma,
                                     int steps, double step_size);

// Exhaustive variant over a sigma grid; returns the loss-minimizing grid point.
double grid_search_sigma_photometric(const std::vector<PhotometricPair>& pairs,
                                     const occ::OcclusionConfig& cfg, double lo, double hi,
                                     double step);

// Key-value parameter file (JSON): kind, sigma, config hash.
void save_params_file(const std::string& path, occ::OcclusionKind kind, double sigma,
                      const std::string& config_hash);
struct ParamsFile {
    occ::OcclusionKind kind;
    double sigma;
    std::string config_hash;
};
ParamsFile load_params_file(const std::string& path);

}  // namespace veil::est
