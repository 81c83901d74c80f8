#pragma once

#include <map>
#include <string>

#include "veil/occ/types.hpp"

namespace veil::pipe {

// Sectioned key-value config file ("[section]" headers, "key = value" lines,
// '#' comments). Unknown keys are rejected so typos fail loudly.
struct Config {
    struct Data {
        std::string root = "data";
        std::string train_source = "train_source.txt";
        std::string train_target = "train_target.txt";
        std::string eval_source = "eval_source.txt";
        std::string eval_gt_style = "eval_gt_style.txt";
        std::string eval_gt_mask = "eval_gt_mask.txt";
        std::string eval_target = "eval_target.txt";
    } data;

    struct Synthetic {
        int n_train_source = 160;
        int n_train_target = 160;
        int n_eval = 24;
        int height = 64;
        int width = 64;
        std::string style = "affine_vgrad";  // affine_vgrad | affine_tophalf | none
        double style_strength = 1.0;
        double sigma_star = 2.5;
        uint64_t seed = 1;
    } synthetic;

    occ::OcclusionConfig occlusion;

    struct Stage {
        int iterations = 1500;
        int batch = 4;
        double lr_g = 2e-4;
        double lr_d = 2e-4;
        int g_base = 16;
        int g_res_blocks = 2;
        int d_base = 16;
        uint64_t seed = 11;
        // stage 3 only
        double beta = 0.75;
        double p_r = 0.7;
        std::string kind = "drop";  // drop | refract | gaussian | dirt | overlay
    };
    Stage stage1;
    Stage stage3;

    struct Estimation {
        double init_sigma = 1.5;
        int steps = 120;
        double step_size = 0.1;
        int batch = 4;
        uint64_t seed = 21;
        bool adaptive = true;
        int max_images = 64;
    } estimation;

    struct Guidance {
        int max_images = 64;
    } guidance;

    struct Eval {
        uint64_t seed = 41;
        int diversity_pairs = 1900;
    } eval;

    std::string hash;  // fnv-1a of the raw file bytes, hex

    static Config load(const std::string& path);
    static Config from_string(const std::string& text);
};

}  // namespace veil::pipe
