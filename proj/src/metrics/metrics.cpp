#include "veil/metrics/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "veil/img/blur.hpp"

namespace veil::metrics {

namespace {

constexpr double kCovReg = 1e-6;

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev[i] = std::sqrt(std::max(0.0, ev[i]));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void fit_gaussian(const std::vector<std::vector<double>>& f, Eigen::VectorXd& mu,
                  Eigen::MatrixXd& cov) {
    const int n = static_cast<int>(f.size());
    const int d = static_cast<int>(f.front().size());
    check(n >= 2, "fid: need at least 2 images per set for a covariance");
    mu = Eigen::VectorXd::Zero(d);
    for (const auto& row : f)
        mu += Eigen::Map<const Eigen::VectorXd>(row.data(), d);
    mu /= n;
    cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& row : f) {
        const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(row.data(), d) - mu;
        cov += c * c.transpose();
    }
    cov /= (n - 1);
    cov += kCovReg * Eigen::MatrixXd::Identity(d, d);
}

double kl(const std::vector<double>& p, const std::vector<double>& m) {
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) acc += p[i] * std::log(p[i] / std::max(m[i], 1e-300));
    return acc;
}

double feature_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

}  // namespace

double fid_from_features(const std::vector<std::vector<double>>& fa,
                         const std::vector<std::vector<double>>& fb) {
    Eigen::VectorXd mu_a, mu_b;
    Eigen::MatrixXd ca, cb;
    fit_gaussian(fa, mu_a, ca);
    fit_gaussian(fb, mu_b, cb);

    const Eigen::MatrixXd ca_sqrt = sqrtm_psd(ca);
    const Eigen::MatrixXd inner = ca_sqrt * cb * ca_sqrt;
    const Eigen::MatrixXd cross = sqrtm_psd(0.5 * (inner + inner.transpose()));

    const double d2 = (mu_a - mu_b).squaredNorm() + ca.trace() + cb.trace() -
                      2.0 * cross.trace();
    return std::max(0.0, d2);
}

double fid(const std::vector<img::Image>& a, const std::vector<img::Image>& b,
           FeatureExtractor& fx) {
    std::vector<std::vector<double>> fa, fb;
    fa.reserve(a.size());
    fb.reserve(b.size());
    for (const auto& im : a) fa.push_back(fx.features(im));
    for (const auto& im : b) fb.push_back(fx.features(im));
    return fid_from_features(fa, fb);
}

double inception_score(const std::vector<img::Image>& set, FeatureExtractor& fx) {
    check(!set.empty(), "inception_score: empty set");
    std::vector<std::vector<double>> probs;
    probs.reserve(set.size());
    std::vector<double> marginal(fx.num_classes(), 0.0);
    for (const auto& im : set) {
        probs.push_back(fx.probs(im));
        for (size_t c = 0; c < marginal.size(); ++c) marginal[c] += probs.back()[c];
    }
    for (double& m : marginal) m /= static_cast<double>(set.size());
    double mean_kl = 0.0;
    for (const auto& p : probs) mean_kl += kl(p, marginal);
    return std::exp(mean_kl / static_cast<double>(set.size()));
}

double conditional_inception_score(const std::vector<std::vector<img::Image>>& groups,
                                   FeatureExtractor& fx) {
    check(!groups.empty(), "cis: no translation groups");
    double mean_group_kl = 0.0;
    for (const auto& group : groups) {
        check(group.size() >= 2, "cis: each source needs at least 2 translations");
        std::vector<std::vector<double>> probs;
        probs.reserve(group.size());
        std::vector<double> marginal(fx.num_classes(), 0.0);
        for (const auto& im : group) {
            probs.push_back(fx.probs(im));
            for (size_t c = 0; c < marginal.size(); ++c) marginal[c] += probs.back()[c];
        }
        for (double& m : marginal) m /= static_cast<double>(group.size());
        double acc = 0.0;
        for (const auto& p : probs) acc += kl(p, marginal);
        mean_group_kl += acc / static_cast<double>(group.size());
    }
    return std::exp(mean_group_kl / static_cast<double>(groups.size()));
}

double perceptual_distance(const std::vector<const img::Image*>& a,
                           const std::vector<const img::Image*>& b, FeatureExtractor& fx) {
    check(!a.empty() && a.size() == b.size(), "perceptual_distance: aligned pairs required");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        acc += feature_l2(fx.features(*a[i]), fx.features(*b[i]));
    return acc / static_cast<double>(a.size());
}

double perceptual_diversity(const std::vector<img::Image>& set, FeatureExtractor& fx,
                            int n_pairs, uint64_t seed, int* pairs_used) {
    check(set.size() >= 2, "perceptual_diversity: need at least 2 images");
    std::vector<std::vector<double>> f;
    f.reserve(set.size());
    for (const auto& im : set) f.push_back(fx.features(im));

    const size_t n = set.size();
    const size_t all_pairs = n * (n - 1) / 2;
    double acc = 0.0;
    int used = 0;
    if (all_pairs <= static_cast<size_t>(n_pairs)) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) {
                acc += feature_l2(f[i], f[j]);
                ++used;
            }
    } else {
        Rng rng(derive_seed(seed, 0x0d1f));
        while (used < n_pairs) {
            const size_t i = static_cast<size_t>(rng.uniform() * n);
            size_t j = static_cast<size_t>(rng.uniform() * n);
            if (i == j) continue;
            acc += feature_l2(f[i], f[j]);
            ++used;
        }
    }
    if (pairs_used) *pairs_used = used;
    return acc / std::max(1, used);
}

namespace {

// Windowed moments via the shared separable blur (reflective borders).
img::Map2D windowed(const std::vector<double>& plane, int h, int w,
                    const img::GaussianKernel& k) {
    img::Map2D out = img::Map2D::create(h, w);
    img::blur_plane(plane.data(), out.v.data(), h, w, k.taps, k.radius);
    return out;
}

}  // namespace

double ssim(const img::Image& a, const img::Image& b) {
    check(a.same_extent(b), "ssim: extent mismatch");
    constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
    const img::GaussianKernel k = img::GaussianKernel::make(1.5, 5.0 / 3.0);
    const int h = a.height, w = a.width;
    const size_t hw = a.plane();
    double total = 0.0;
    std::vector<double> tmp(hw);
    for (int c = 0; c < a.channels; ++c) {
        const double* pa = a.plane_ptr(c);
        const double* pb = b.plane_ptr(c);
        std::vector<double> va(pa, pa + hw), vb(pb, pb + hw);
        const img::Map2D mu_a = windowed(va, h, w, k);
        const img::Map2D mu_b = windowed(vb, h, w, k);
        for (size_t i = 0; i < hw; ++i) tmp[i] = va[i] * va[i];
        const img::Map2D raw_aa = windowed(tmp, h, w, k);
        for (size_t i = 0; i < hw; ++i) tmp[i] = vb[i] * vb[i];
        const img::Map2D raw_bb = windowed(tmp, h, w, k);
        for (size_t i = 0; i < hw; ++i) tmp[i] = va[i] * vb[i];
        const img::Map2D raw_ab = windowed(tmp, h, w, k);

        double acc = 0.0;
        for (size_t i = 0; i < hw; ++i) {
            const double ma = mu_a.v[i], mb = mu_b.v[i];
            const double saa = raw_aa.v[i] - ma * ma;
            const double sbb = raw_bb.v[i] - mb * mb;
            const double sab = raw_ab.v[i] - ma * mb;
            acc += ((2 * ma * mb + kC1) * (2 * sab + kC2)) /
                   ((ma * ma + mb * mb + kC1) * (saa + sbb + kC2));
        }
        total += acc / static_cast<double>(hw);
    }
    return total / a.channels;
}

double psnr(const img::Image& a, const img::Image& b) {
    check(a.same_extent(b), "psnr: extent mismatch");
    double mse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double e = a.data[i] - b.data[i];
        mse += e * e;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

std::pair<double, double> ssim_psnr(const std::vector<const img::Image*>& a,
                                    const std::vector<const img::Image*>& b) {
    check(!a.empty() && a.size() == b.size(), "ssim_psnr: aligned pairs required");
    double s = 0.0, p = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        s += ssim(*a[i], *b[i]);
        p += psnr(*a[i], *b[i]);
    }
    return {s / a.size(), p / a.size()};
}

void MetricReport::save(const std::string& path) const {
    nlohmann::json j;
    j["metric"] = metric;
    if (std::isinf(value))
        j["value"] = value > 0 ? "inf" : "-inf";
    else
        j["value"] = value;
    j["n_a"] = n_a;
    j["n_b"] = n_b;
    j["extractor"] = extractor;
    j["config_hash"] = config_hash;
    if (pairs_used) j["pairs_used"] = *pairs_used;
    if (psnr) {
        if (std::isinf(*psnr))
            j["psnr"] = *psnr > 0 ? "inf" : "-inf";
        else
            j["psnr"] = *psnr;
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot write report: " + path);
    f << j.dump(2) << "\n";
}

}  // namespace veil::metrics
