#pragma once

#include "veil/est/estimate.hpp"
#include "veil/guide/guidance.hpp"
#include "veil/net/checkpoint.hpp"
#include "veil/pipe/config.hpp"

namespace veil::pipe {

struct TrainResult {
    std::string checkpoint_path;
    std::vector<std::array<double, 3>> log;  // iteration, gen loss, disc loss
};

// Stage 1: entangled source -> target LSGAN baseline; its discriminator is the
// frozen input to parameter estimation and guidance.
TrainResult stage1_train_baseline(const Config& cfg, const std::string& out_dir);

// Stage 2 drivers.
est::EstimationTrace run_estimation(const Config& cfg, const std::string& stage1_ckpt,
                                    const std::string& out_params);
guide::GuidanceMap run_guidance(const Config& cfg, const std::string& stage1_ckpt,
                                const std::string& out_dg, const std::string& preview_png);

// Stage 3: freshly initialized networks trained with occlusions rendered on
// G(x) inside the training graph, injected only where DG < beta.
TrainResult stage3_train_disentangled(const Config& cfg, const std::string& params_path,
                                      const std::string& dg_path, const std::string& out_dir);

// Inference-time translation plus optional occlusion re-injection.
struct RenderOptions {
    const est::ParamsFile* params = nullptr;  // null: no injection
    const img::Map2D* mask = nullptr;         // optional DG-derived mask
    double p_r = -1.0;                        // override config p_r when >= 0
    uint64_t seed = 0;
};
img::Image render_one(net::Generator* g, const img::Image& x, const Config& cfg,
                      const RenderOptions& opts, int index);

}  // namespace veil::pipe
