#pragma once

#include <memory>
#include <string>

#include "veil/net/layers.hpp"

namespace veil::metrics {

// Pluggable feature source for the metric suite. `features` feeds FID and the
// perceptual distances, `probs` the inception-style scores.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::vector<double> features(const img::Image& x) = 0;
    virtual std::vector<double> probs(const img::Image& x) = 0;
    virtual int feature_dim() const = 0;
    virtual int num_classes() const = 0;
    virtual std::string provenance() const = 0;
};

// Small convolutional classifier standing in for a finetuned inception net at
// desk scale: three stride-2 conv/relu stages, global average pooling into the
// feature vector, and a linear softmax head over the dataset's labels.
class SmallCnnExtractor final : public FeatureExtractor {
public:
    SmallCnnExtractor(int num_classes, uint64_t seed);

    std::vector<double> features(const img::Image& x) override;
    std::vector<double> probs(const img::Image& x) override;
    int feature_dim() const override { return kFeatureDim; }
    int num_classes() const override { return classes_; }
    std::string provenance() const override;

    // Cross-entropy training on labeled image sets; deterministic in seed.
    void train(const std::vector<std::vector<img::Image>>& labeled_sets, int steps, double lr,
               uint64_t seed);

    void save(const std::string& path) const;
    static SmallCnnExtractor load(const std::string& path);

    static constexpr int kFeatureDim = 32;

private:
    net::Tensor backbone(const img::Image& x);
    std::vector<net::ParamBlob> params();

    int classes_;
    uint64_t seed_;
    int trained_steps_ = 0;
    std::unique_ptr<net::Conv2d> c1_, c2_, c3_;
    std::unique_ptr<net::LeakyRelu> a1_, a2_, a3_;
    std::vector<double> fc_w_, fc_b_, gfc_w_, gfc_b_;
};

}  // namespace veil::metrics
