#include "veil/net/discriminator.hpp"

namespace veil::net {

namespace {
constexpr double kLeak = 0.2;
}

Discriminator::Discriminator(const Config& cfg, uint64_t seed) : cfg_(cfg) {
    check(cfg.scales >= 2, "Discriminator: at least two scales required");
    Rng rng(seed);
    scales_.resize(cfg.scales);
    const int c = cfg.base_channels;
    for (int s = 0; s < cfg.scales; ++s) {
        Scale& sc = scales_[s];
        sc.c1 = std::make_unique<Conv2d>(5, c, 4, 2, 1, rng);
        sc.a1 = std::make_unique<LeakyRelu>(kLeak);
        sc.c2 = std::make_unique<Conv2d>(c, 2 * c, 4, 2, 1, rng);
        sc.a2 = std::make_unique<LeakyRelu>(kLeak);
        sc.c3 = std::make_unique<Conv2d>(2 * c, 4 * c, 3, 1, 1, rng);
        sc.a3 = std::make_unique<LeakyRelu>(kLeak);
        sc.head = std::make_unique<Conv2d>(4 * c, 1, 3, 1, 1, rng);
        const std::string p = "s" + std::to_string(s);
        registry_.push_back(p + ".l1");
        registry_.push_back(p + ".l2");
        registry_.push_back(p + ".l3");
    }
}

std::vector<Tensor> Discriminator::forward(const Tensor& x) {
    check(x.c == 3, "Discriminator: expects a 3-channel input");
    check(x.h >= 16 && x.w >= 16, "Discriminator: input too small");
    input_h_ = x.h;
    input_w_ = x.w;
    std::vector<Tensor> out;
    Tensor cur = x;
    for (size_t s = 0; s < scales_.size(); ++s) {
        if (s > 0) cur = avgpool2(cur);
        Scale& sc = scales_[s];
        Tensor t = with_coord_channels(cur);
        sc.in_h = t.h;
        sc.in_w = t.w;
        sc.act1 = sc.a1->forward(sc.c1->forward(t));
        sc.act2 = sc.a2->forward(sc.c2->forward(sc.act1));
        sc.act3 = sc.a3->forward(sc.c3->forward(sc.act2));
        sc.score = sc.head->forward(sc.act3);
        out.push_back(sc.score);
    }
    return out;
}

void Discriminator::backward_params(const std::vector<Tensor>& gscores) {
    check(gscores.size() == scales_.size(), "Discriminator: one gradient per scale required");
    for (size_t s = 0; s < scales_.size(); ++s) {
        Scale& sc = scales_[s];
        Tensor g = sc.head->backward(gscores[s], true);
        g = sc.c3->backward(sc.a3->backward(g, true), true);
        g = sc.c2->backward(sc.a2->backward(g, true), true);
        sc.c1->backward(sc.a1->backward(g, true), true);
    }
}

Tensor Discriminator::backward_input(const std::vector<Tensor>& gscores) {
    check(gscores.size() == scales_.size(), "Discriminator: one gradient per scale required");
    Tensor total;  // accumulated at full resolution, 3 channels
    for (size_t s = scales_.size(); s-- > 0;) {
        Scale& sc = scales_[s];
        Tensor g = sc.head->backward(gscores[s], false);
        g = sc.c3->backward(sc.a3->backward(g, false), false);
        g = sc.c2->backward(sc.a2->backward(g, false), false);
        g = sc.c1->backward(sc.a1->backward(g, false), false);
        // strip coordinate channels
        Tensor gin = Tensor::create(3, g.h, g.w);
        std::copy(g.data.begin(), g.data.begin() + gin.size(), gin.data.begin());
        // walk back through the scale pyramid to full resolution
        for (size_t k = s; k-- > 0;) {
            (void)k;
            gin = avgpool2_backward(gin, gin.h * 2, gin.w * 2);
        }
        if (total.size() == 0) {
            total = gin;
        } else {
            for (size_t i = 0; i < total.size(); ++i) total.data[i] += gin.data[i];
        }
    }
    return total;
}

int Discriminator::find_layer(const std::string& layer_id, int* scale_idx) const {
    for (size_t s = 0; s < scales_.size(); ++s) {
        const std::string p = "s" + std::to_string(s);
        if (layer_id == p + ".l1") { *scale_idx = static_cast<int>(s); return 1; }
        if (layer_id == p + ".l2") { *scale_idx = static_cast<int>(s); return 2; }
        if (layer_id == p + ".l3") { *scale_idx = static_cast<int>(s); return 3; }
    }
    throw RangeError("Discriminator: unknown layer id: " + layer_id);
}

const Tensor& Discriminator::activation(const std::string& layer_id) const {
    int s = 0;
    const int l = find_layer(layer_id, &s);
    const Scale& sc = scales_[s];
    return l == 1 ? sc.act1 : l == 2 ? sc.act2 : sc.act3;
}

Tensor Discriminator::score_gradient_at(const std::string& layer_id, double score_weight) const {
    int s = 0;
    const int l = find_layer(layer_id, &s);
    auto& sc = const_cast<Scale&>(scales_[s]);
    Tensor g = sc.score;
    std::fill(g.data.begin(), g.data.end(), score_weight / static_cast<double>(g.size()));
    g = sc.head->backward(g, false);
    if (l == 3) return g;
    g = sc.c3->backward(sc.a3->backward(g, false), false);
    if (l == 2) return g;
    return sc.c2->backward(sc.a2->backward(g, false), false);
}

std::vector<ParamBlob> Discriminator::params() {
    std::vector<ParamBlob> out;
    for (size_t s = 0; s < scales_.size(); ++s) {
        const std::string p = "d.s" + std::to_string(s);
        scales_[s].c1->collect_params(p + ".c1", out);
        scales_[s].c2->collect_params(p + ".c2", out);
        scales_[s].c3->collect_params(p + ".c3", out);
        scales_[s].head->collect_params(p + ".head", out);
    }
    return out;
}

void Discriminator::zero_grads() {
    for (auto& p : params()) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

uint64_t Discriminator::param_hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (auto& p : const_cast<Discriminator*>(this)->params()) h = fnv1a(*p.value, h);
    return h;
}

}  // namespace veil::net
