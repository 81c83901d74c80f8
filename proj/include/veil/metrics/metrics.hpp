#pragma once

#include <optional>

#include "veil/metrics/extractor.hpp"

namespace veil::metrics {

struct MetricReport {
    std::string metric;
    double value = 0.0;
    int n_a = 0;
    int n_b = 0;
    std::string extractor;
    std::string config_hash;
    std::optional<int> pairs_used;
    std::optional<double> psnr;  // emitted alongside ssim

    void save(const std::string& path) const;
};

// Frechet distance between Gaussian fits of extractor features. Covariances
// are the unbiased sample estimates regularized by 1e-6 * I.
double fid(const std::vector<img::Image>& a, const std::vector<img::Image>& b,
           FeatureExtractor& fx);
double fid_from_features(const std::vector<std::vector<double>>& fa,
                         const std::vector<std::vector<double>>& fb);

// IS = exp(E[KL(p(c|x) || p(c))]) over the whole set; CIS applies the same
// within each source's translation group, then averages the KL before the exp.
double inception_score(const std::vector<img::Image>& set, FeatureExtractor& fx);
double conditional_inception_score(const std::vector<std::vector<img::Image>>& groups,
                                   FeatureExtractor& fx);

// Mean feature-space L2 distance over aligned pairs.
double perceptual_distance(const std::vector<const img::Image*>& a,
                           const std::vector<const img::Image*>& b, FeatureExtractor& fx);
// Mean pairwise distance over sampled unordered pairs of a translation set;
// uses every pair when fewer than n_pairs exist. *pairs_used reports the count.
double perceptual_diversity(const std::vector<img::Image>& set, FeatureExtractor& fx,
                            int n_pairs, uint64_t seed, int* pairs_used = nullptr);

// Windowed SSIM (11x11 Gaussian window, sigma 1.5, k1 = 0.01, k2 = 0.03 on a
// unit dynamic range) and PSNR over [0,1]; a zero-MSE pair reports +inf.
double ssim(const img::Image& a, const img::Image& b);
double psnr(const img::Image& a, const img::Image& b);
std::pair<double, double> ssim_psnr(const std::vector<const img::Image*>& a,
                                    const std::vector<const img::Image*>& b);

}  // namespace veil::metrics
