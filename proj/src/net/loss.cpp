#include "veil/net/loss.hpp"

namespace veil::net {

namespace {

double mean_sq_to(const std::vector<Tensor>& scores, double target) {
    check(!scores.empty(), "lsgan loss: no score maps");
    double acc = 0.0;
    for (const Tensor& s : scores) {
        double m = 0.0;
        for (double v : s.data) m += (v - target) * (v - target);
        acc += m / static_cast<double>(s.size());
    }
    return acc / static_cast<double>(scores.size());
}

std::vector<Tensor> grad_sq_to(const std::vector<Tensor>& scores, double target) {
    std::vector<Tensor> g;
    g.reserve(scores.size());
    const double scale_w = 1.0 / static_cast<double>(scores.size());
    for (const Tensor& s : scores) {
        Tensor gi = s;
        const double k = 2.0 * scale_w / static_cast<double>(s.size());
        for (size_t i = 0; i < gi.size(); ++i) gi.data[i] = k * (s.data[i] - target);
        g.push_back(std::move(gi));
    }
    return g;
}

}  // namespace

double lsgan_gen_loss(const std::vector<Tensor>& fake_scores) {
    return mean_sq_to(fake_scores, 1.0);
}

double lsgan_disc_loss(const std::vector<Tensor>& fake_scores,
                       const std::vector<Tensor>& real_scores) {
    return mean_sq_to(fake_scores, 0.0) + mean_sq_to(real_scores, 1.0);
}

std::vector<Tensor> lsgan_gen_loss_grad(const std::vector<Tensor>& fake_scores) {
    return grad_sq_to(fake_scores, 1.0);
}

std::vector<Tensor> lsgan_disc_fake_grad(const std::vector<Tensor>& fake_scores) {
    return grad_sq_to(fake_scores, 0.0);
}

std::vector<Tensor> lsgan_disc_real_grad(const std::vector<Tensor>& real_scores) {
    return grad_sq_to(real_scores, 1.0);
}

}  // namespace veil::net
