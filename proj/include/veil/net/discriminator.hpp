#pragma once

#include <memory>
#include <string>

#include "veil/net/layers.hpp"

namespace veil::net {

// Fully-convolutional patch scorer over two scales (full and half resolution).
// Each scale keeps its post-activation feature maps so GradCAM and the input
// gradients can be computed from the same forward pass.
class Discriminator {
public:
    struct Config {
        int base_channels = 16;
        int scales = 2;
    };

    Discriminator(const Config& cfg, uint64_t seed);

    // One score map per scale.
    std::vector<Tensor> forward(const Tensor& x);

    // Parameter gradients from per-scale score gradients (training D).
    void backward_params(const std::vector<Tensor>& gscores);

    // Gradient with respect to the 3-channel input image (training G,
    // parameter estimation). Parameter gradients untouched.
    Tensor backward_input(const std::vector<Tensor>& gscores);

    // --- layer registry (GradCAM) ---
    const std::vector<std::string>& layer_registry() const { return registry_; }
    // Post-activation feature map of a registered layer, from the last forward.
    const Tensor& activation(const std::string& layer_id) const;
    // d(scalar)/d(activation) for scalar = score_weight * mean(score map) of
    // the layer's own scale.
    Tensor score_gradient_at(const std::string& layer_id, double score_weight) const;

    std::vector<ParamBlob> params();
    void zero_grads();
    uint64_t param_hash() const;

    const Config& config() const { return cfg_; }

private:
    struct Scale {
        std::unique_ptr<Conv2d> c1, c2, c3, head;
        std::unique_ptr<LeakyRelu> a1, a2, a3;
        Tensor act1, act2, act3;  // post-activation maps
        Tensor score;
        int in_h = 0, in_w = 0;
    };

    int find_layer(const std::string& layer_id, int* scale_idx) const;

    Config cfg_;
    std::vector<Scale> scales_;
    std::vector<std::string> registry_;
    int input_h_ = 0, input_w_ = 0;
};

}  // namespace veil::net
