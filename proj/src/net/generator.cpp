#include "veil/net/generator.hpp"

#include <cmath>

namespace veil::net {

namespace {
constexpr double kLeak = 0.1;
constexpr double kSkipGain = 4.0;  // sigmoid(4*(x-0.5)) is a gentle identity
constexpr int kMinExtent = 32;
}  // namespace

Generator::Generator(const Config& cfg, uint64_t seed) : cfg_(cfg) {
    Rng rng(seed);
    const int c = cfg.base_channels;
    e1_ = std::make_unique<Conv2d>(5, c, 3, 1, 1, rng);
    en1_ = std::make_unique<InstanceNorm>(c);
    ea1_ = std::make_unique<LeakyRelu>(kLeak);
    e2_ = std::make_unique<Conv2d>(c, 2 * c, 3, 2, 1, rng);
    en2_ = std::make_unique<InstanceNorm>(2 * c);
    ea2_ = std::make_unique<LeakyRelu>(kLeak);
    e3_ = std::make_unique<Conv2d>(2 * c, 3 * c, 3, 2, 1, rng);
    en3_ = std::make_unique<InstanceNorm>(3 * c);
    ea3_ = std::make_unique<LeakyRelu>(kLeak);
    res_.resize(cfg.res_blocks);
    for (auto& r : res_) {
        r.c1 = std::make_unique<Conv2d>(3 * c, 3 * c, 3, 1, 1, rng);
        r.n1 = std::make_unique<InstanceNorm>(3 * c);
        r.a1 = std::make_unique<LeakyRelu>(kLeak);
        r.c2 = std::make_unique<Conv2d>(3 * c, 3 * c, 3, 1, 1, rng);
        r.n2 = std::make_unique<InstanceNorm>(3 * c);
    }
    d1_ = std::make_unique<Conv2d>(3 * c, 2 * c, 3, 1, 1, rng);
    dn1_ = std::make_unique<InstanceNorm>(2 * c);
    da1_ = std::make_unique<LeakyRelu>(kLeak);
    up1_ = std::make_unique<UpsampleNearest2x>();
    d2_ = std::make_unique<Conv2d>(2 * c, c, 3, 1, 1, rng);
    dn2_ = std::make_unique<InstanceNorm>(c);
    da2_ = std::make_unique<LeakyRelu>(kLeak);
    up2_ = std::make_unique<UpsampleNearest2x>();
    d3_ = std::make_unique<Conv2d>(c, c, 3, 1, 1, rng);
    dn3_ = std::make_unique<InstanceNorm>(c);
    da3_ = std::make_unique<LeakyRelu>(kLeak);
    head_ = std::make_unique<Conv2d>(c, 3, 3, 1, 1, rng);
}

Tensor Generator::forward(const Tensor& x) {
    check(x.c == 3, "Generator: expects a 3-channel input");
    check(x.h >= kMinExtent && x.w >= kMinExtent,
          "Generator: extent below the 32 px minimum");
    check(x.h % 4 == 0 && x.w % 4 == 0, "Generator: extent must be divisible by 4");
    input_rgb_ = x;

    Tensor t = with_coord_channels(x);
    t = ea1_->forward(en1_->forward(e1_->forward(t)));
    t = ea2_->forward(en2_->forward(e2_->forward(t)));
    t = ea3_->forward(en3_->forward(e3_->forward(t)));
    res_in_ = t;
    res_skip_in_.clear();
    for (auto& r : res_) {
        res_skip_in_.push_back(t);
        Tensor f = r.a1->forward(r.n1->forward(r.c1->forward(t)));
        f = r.n2->forward(r.c2->forward(f));
        for (size_t i = 0; i < f.size(); ++i) f.data[i] += t.data[i];
        t = std::move(f);
    }
    t = da1_->forward(dn1_->forward(d1_->forward(t)));
    t = up1_->forward(t);
    t = da2_->forward(dn2_->forward(d2_->forward(t)));
    t = up2_->forward(t);
    t = da3_->forward(dn3_->forward(d3_->forward(t)));
    head_out_ = head_->forward(t);

    out_ = head_out_;
    for (size_t i = 0; i < out_.size(); ++i) {
        const double z = head_out_.data[i] + kSkipGain * (x.data[i] - 0.5);
        out_.data[i] = 1.0 / (1.0 + std::exp(-z));
    }
    return out_;
}

img::Image Generator::translate(const img::Image& x) {
    return forward(Tensor::from_image(x)).to_image();
}

void Generator::backward(const Tensor& gy) {
    check(gy.same_shape(out_), "Generator: bad output gradient shape");
    Tensor g = gy;
    for (size_t i = 0; i < g.size(); ++i) {
        const double y = out_.data[i];
        g.data[i] *= y * (1.0 - y);
    }
    g = head_->backward(g, true);
    g = dn3_->backward(da3_->backward(g, true), true);
    g = d3_->backward(g, true);
    g = up2_->backward(g, true);
    g = dn2_->backward(da2_->backward(g, true), true);
    g = d2_->backward(g, true);
    g = up1_->backward(g, true);
    g = dn1_->backward(da1_->backward(g, true), true);
    g = d1_->backward(g, true);
    for (size_t bi = res_.size(); bi-- > 0;) {
        auto& r = res_[bi];
        Tensor gf = r.c2->backward(r.n2->backward(g, true), true);
        gf = r.a1->backward(gf, true);
        gf = r.c1->backward(r.n1->backward(gf, true), true);
        for (size_t i = 0; i < g.size(); ++i) g.data[i] += gf.data[i];
    }
    g = en3_->backward(ea3_->backward(g, true), true);
    g = e3_->backward(g, true);
    g = en2_->backward(ea2_->backward(g, true), true);
    g = e2_->backward(g, true);
    g = en1_->backward(ea1_->backward(g, true), true);
    e1_->backward(g, true);
}

std::vector<ParamBlob> Generator::params() {
    std::vector<ParamBlob> out;
    e1_->collect_params("g.e1", out);
    en1_->collect_params("g.en1", out);
    e2_->collect_params("g.e2", out);
    en2_->collect_params("g.en2", out);
    e3_->collect_params("g.e3", out);
    en3_->collect_params("g.en3", out);
    for (size_t i = 0; i < res_.size(); ++i) {
        const std::string p = "g.res" + std::to_string(i);
        res_[i].c1->collect_params(p + ".c1", out);
        res_[i].n1->collect_params(p + ".n1", out);
        res_[i].c2->collect_params(p + ".c2", out);
        res_[i].n2->collect_params(p + ".n2", out);
    }
    d1_->collect_params("g.d1", out);
    dn1_->collect_params("g.dn1", out);
    d2_->collect_params("g.d2", out);
    dn2_->collect_params("g.dn2", out);
    d3_->collect_params("g.d3", out);
    dn3_->collect_params("g.dn3", out);
    head_->collect_params("g.head", out);
    return out;
}

void Generator::zero_grads() {
    for (auto& p : params()) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

uint64_t Generator::param_hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (auto& p : const_cast<Generator*>(this)->params()) h = fnv1a(*p.value, h);
    return h;
}

}  // namespace veil::net
