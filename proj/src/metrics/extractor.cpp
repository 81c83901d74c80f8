#include "veil/metrics/extractor.hpp"

#include <cmath>

#include "veil/kern/kernels.hpp"
#include "veil/net/adam.hpp"
#include "veil/net/checkpoint.hpp"

namespace veil::metrics {

namespace {
constexpr double kLeak = 0.1;

std::vector<double> softmax(const std::vector<double>& z) {
    std::vector<double> p(z.size());
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double sum = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}
}  // namespace

SmallCnnExtractor::SmallCnnExtractor(int num_classes, uint64_t seed)
    : classes_(num_classes), seed_(seed) {
    check(num_classes >= 1, "extractor: num_classes must be >= 1");
    Rng rng(seed);
    // He-style init keeps feature magnitudes O(1) through the stack
    c1_ = std::make_unique<net::Conv2d>(3, 8, 3, 2, 1, rng, std::sqrt(2.0 / (3 * 9)));
    a1_ = std::make_unique<net::LeakyRelu>(kLeak);
    c2_ = std::make_unique<net::Conv2d>(8, 16, 3, 2, 1, rng, std::sqrt(2.0 / (8 * 9)));
    a2_ = std::make_unique<net::LeakyRelu>(kLeak);
    c3_ = std::make_unique<net::Conv2d>(16, kFeatureDim, 3, 2, 1, rng,
                                        std::sqrt(2.0 / (16 * 9)));
    a3_ = std::make_unique<net::LeakyRelu>(kLeak);
    fc_w_.resize(static_cast<size_t>(classes_) * kFeatureDim);
    for (double& w : fc_w_) w = rng.normal(0.0, std::sqrt(2.0 / kFeatureDim));
    fc_b_.assign(classes_, 0.0);
    gfc_w_.assign(fc_w_.size(), 0.0);
    gfc_b_.assign(fc_b_.size(), 0.0);
}

net::Tensor SmallCnnExtractor::backbone(const img::Image& x) {
    check(x.channels == 3, "extractor: expects 3-channel images");
    net::Tensor t = net::Tensor::from_image(x);
    t = a1_->forward(c1_->forward(t));
    t = a2_->forward(c2_->forward(t));
    return a3_->forward(c3_->forward(t));
}

std::vector<double> SmallCnnExtractor::features(const img::Image& x) {
    const net::Tensor t = backbone(x);
    std::vector<double> f(kFeatureDim);
    const double inv = 1.0 / static_cast<double>(t.plane());
    for (int c = 0; c < kFeatureDim; ++c)
        f[c] = kern::active().sum(t.plane_ptr(c), t.plane()) * inv;
    return f;
}

std::vector<double> SmallCnnExtractor::probs(const img::Image& x) {
    const std::vector<double> f = features(x);
    std::vector<double> z(classes_, 0.0);
    for (int k = 0; k < classes_; ++k)
        z[k] = fc_b_[k] +
               kern::active().dot(fc_w_.data() + static_cast<size_t>(k) * kFeatureDim,
                                  f.data(), kFeatureDim);
    return softmax(z);
}

std::string SmallCnnExtractor::provenance() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (auto& p : const_cast<SmallCnnExtractor*>(this)->params()) h = fnv1a(*p.value, h);
    return "desk-cnn/c" + std::to_string(classes_) + "/seed" + std::to_string(seed_) +
           "/steps" + std::to_string(trained_steps_) + "/" + to_hex(h);
}

std::vector<net::ParamBlob> SmallCnnExtractor::params() {
    std::vector<net::ParamBlob> out;
    c1_->collect_params("fx.c1", out);
    c2_->collect_params("fx.c2", out);
    c3_->collect_params("fx.c3", out);
    out.push_back({"fx.fc.weight", &fc_w_, &gfc_w_});
    out.push_back({"fx.fc.bias", &fc_b_, &gfc_b_});
    return out;
}

void SmallCnnExtractor::train(const std::vector<std::vector<img::Image>>& labeled_sets,
                              int steps, double lr, uint64_t seed) {
    check(static_cast<int>(labeled_sets.size()) == classes_,
          "extractor: one image set per class required");
    for (const auto& set : labeled_sets) check(!set.empty(), "extractor: empty class set");

    net::Adam opt(lr, 0.9, 0.999);
    Rng rng(derive_seed(seed, 0xfeed));
    for (int it = 0; it < steps; ++it) {
        const int label = static_cast<int>(rng.uniform() * classes_);
        const auto& set = labeled_sets[label];
        const img::Image& x = set[static_cast<size_t>(rng.uniform() * set.size())];

        for (auto& p : params()) std::fill(p.grad->begin(), p.grad->end(), 0.0);

        const net::Tensor t = backbone(x);
        const double inv = 1.0 / static_cast<double>(t.plane());
        std::vector<double> f(kFeatureDim);
        for (int c = 0; c < kFeatureDim; ++c)
            f[c] = kern::active().sum(t.plane_ptr(c), t.plane()) * inv;
        std::vector<double> z(classes_, 0.0);
        for (int k = 0; k < classes_; ++k)
            z[k] = fc_b_[k] +
                   kern::active().dot(fc_w_.data() + static_cast<size_t>(k) * kFeatureDim,
                                      f.data(), kFeatureDim);
        const std::vector<double> p = softmax(z);

        // cross-entropy backward: dlogits = p - onehot
        std::vector<double> dz = p;
        dz[label] -= 1.0;
        std::vector<double> df(kFeatureDim, 0.0);
        for (int k = 0; k < classes_; ++k) {
            for (int c = 0; c < kFeatureDim; ++c) {
                gfc_w_[static_cast<size_t>(k) * kFeatureDim + c] += dz[k] * f[c];
                df[c] += dz[k] * fc_w_[static_cast<size_t>(k) * kFeatureDim + c];
            }
            gfc_b_[k] += dz[k];
        }
        net::Tensor gt = net::Tensor::create(kFeatureDim, t.h, t.w);
        for (int c = 0; c < kFeatureDim; ++c) {
            double* g = gt.plane_ptr(c);
            for (size_t i = 0; i < t.plane(); ++i) g[i] = df[c] * inv;
        }
        net::Tensor g = c3_->backward(a3_->backward(gt, true), true);
        g = c2_->backward(a2_->backward(g, true), true);
        c1_->backward(a1_->backward(g, true), true);
        opt.step(params());
        ++trained_steps_;
    }
}

void SmallCnnExtractor::save(const std::string& path) const {
    net::Checkpoint ck;
    ck.stage = "extractor";
    auto* self = const_cast<SmallCnnExtractor*>(this);
    ck.put_scalar("fx.arch.classes", classes_);
    ck.put_scalar("fx.arch.seed", static_cast<double>(seed_));
    ck.put_scalar("fx.arch.steps", trained_steps_);
    net::store_params(ck, self->params());
    ck.save(path);
}

SmallCnnExtractor SmallCnnExtractor::load(const std::string& path) {
    const net::Checkpoint ck = net::Checkpoint::load(path);
    SmallCnnExtractor fx(static_cast<int>(ck.scalar("fx.arch.classes")),
                         static_cast<uint64_t>(ck.scalar("fx.arch.seed")));
    fx.trained_steps_ = static_cast<int>(ck.scalar("fx.arch.steps"));
    net::load_params(ck, fx.params());
    return fx;
}

}  // namespace veil::metrics
