#pragma once

#include <memory>
#include <string>
#include <vector>

#include "veil/core/common.hpp"
#include "veil/net/tensor.hpp"

namespace veil::net {

struct ParamBlob {
    std::string name;
    std::vector<double>* value;
    std::vector<double>* grad;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x) = 0;
    // Returns the input gradient; accumulates parameter gradients when asked.
    virtual Tensor backward(const Tensor& gy, bool want_param_grads) = 0;
    virtual void collect_params(const std::string& prefix, std::vector<ParamBlob>& out) {
        (void)prefix;
        (void)out;
    }
};

class Conv2d final : public Layer {
public:
    Conv2d(int cin, int cout, int k, int stride, int pad, Rng& rng,
           double init_std = 0.02);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy, bool want_param_grads) override;
    void collect_params(const std::string& prefix, std::vector<ParamBlob>& out) override;

    int cin() const { return cin_; }
    int cout() const { return cout_; }

private:
    int cin_, cout_, k_, stride_, pad_;
    std::vector<double> weight_, bias_;      // (cout x cin*k*k), (cout)
    std::vector<double> gweight_, gbias_;
    // forward context
    int in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0;
    std::vector<double> col_;                // (cin*k*k x out_hw)
};

class InstanceNorm final : public Layer {
public:
    explicit InstanceNorm(int channels);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy, bool want_param_grads) override;
    void collect_params(const std::string& prefix, std::vector<ParamBlob>& out) override;

private:
    int channels_;
    std::vector<double> gamma_, beta_, ggamma_, gbeta_;
    Tensor xhat_;
    std::vector<double> stdinv_;
};

class LeakyRelu final : public Layer {
public:
    explicit LeakyRelu(double slope) : slope_(slope) {}
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy, bool want_param_grads) override;

private:
    double slope_;
    Tensor x_;
};

class UpsampleNearest2x final : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy, bool want_param_grads) override;
};

Tensor avgpool2(const Tensor& x);
Tensor avgpool2_backward(const Tensor& gy, int in_h, int in_w);

}  // namespace veil::net
