#pragma once

#include <map>

#include "veil/net/layers.hpp"

namespace veil::net {

class Adam {
public:
    Adam(double lr, double beta1 = 0.5, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<ParamBlob>& params);

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    int64_t t() const { return t_; }

    // checkpoint plumbing: state blobs keyed by parameter name
    std::map<std::string, std::vector<double>>& moments1() { return m_; }
    std::map<std::string, std::vector<double>>& moments2() { return v_; }
    void set_t(int64_t t) { t_ = t; }

private:
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::map<std::string, std::vector<double>> m_, v_;
};

}  // namespace veil::net
