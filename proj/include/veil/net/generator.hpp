#pragma once

#include <memory>

#include "veil/net/layers.hpp"

namespace veil::net {

// Encoder-decoder translator: two stride-2 stages (downsample factor 4), a
// residual bottleneck, nearest-neighbor upsampling back to full resolution and
// a sigmoid head with a fixed-gain skip from the input, so the map starts out
// near-identity and the output always lies in [0,1].
class Generator {
public:
    struct Config {
        int base_channels = 16;
        int res_blocks = 2;
    };

    Generator(const Config& cfg, uint64_t seed);

    Tensor forward(const Tensor& x);
    img::Image translate(const img::Image& x);

    // Backward from a gradient on the output; accumulates parameter grads.
    void backward(const Tensor& gy);

    std::vector<ParamBlob> params();
    void zero_grads();
    uint64_t param_hash() const;

    const Config& config() const { return cfg_; }

private:
    struct ResBlock {
        std::unique_ptr<Conv2d> c1, c2;
        std::unique_ptr<InstanceNorm> n1, n2;
        std::unique_ptr<LeakyRelu> a1;
    };

    Config cfg_;
    std::unique_ptr<Conv2d> e1_, e2_, e3_, d1_, d2_, d3_, head_;
    std::unique_ptr<InstanceNorm> en1_, en2_, en3_, dn1_, dn2_, dn3_;
    std::unique_ptr<LeakyRelu> ea1_, ea2_, ea3_, da1_, da2_, da3_;
    std::vector<ResBlock> res_;
    std::unique_ptr<UpsampleNearest2x> up1_, up2_;

    // forward context
    Tensor input_rgb_;
    Tensor res_in_;
    std::vector<Tensor> res_skip_in_;
    Tensor head_out_;
    Tensor out_;
};

}  // namespace veil::net
