#pragma once

#include "veil/net/tensor.hpp"

namespace veil::net {

// Least-squares GAN objectives; expectations run over pixels and scales (the
// batch average is taken by the trainer loop).
double lsgan_gen_loss(const std::vector<Tensor>& fake_scores);
double lsgan_disc_loss(const std::vector<Tensor>& fake_scores,
                       const std::vector<Tensor>& real_scores);

// d loss / d score for each scale.
std::vector<Tensor> lsgan_gen_loss_grad(const std::vector<Tensor>& fake_scores);
std::vector<Tensor> lsgan_disc_fake_grad(const std::vector<Tensor>& fake_scores);
std::vector<Tensor> lsgan_disc_real_grad(const std::vector<Tensor>& real_scores);

}  // namespace veil::net
