#include "veil/net/adam.hpp"

#include <cmath>

#include "veil/kern/kernels.hpp"

namespace veil::net {

void Adam::step(const std::vector<ParamBlob>& params) {
    ++t_;
    const double bc1 = 1.0 / (1.0 - std::pow(beta1_, static_cast<double>(t_)));
    const double bc2 = 1.0 / (1.0 - std::pow(beta2_, static_cast<double>(t_)));
    for (const ParamBlob& p : params) {
        auto& m = m_[p.name];
        auto& v = v_[p.name];
        if (m.size() != p.value->size()) m.assign(p.value->size(), 0.0);
        if (v.size() != p.value->size()) v.assign(p.value->size(), 0.0);
        kern::active().adam_step(p.value->data(), m.data(), v.data(), p.grad->data(),
                                 p.value->size(), lr_, beta1_, beta2_, eps_, bc1, bc2);
    }
}

}  // namespace veil::net
