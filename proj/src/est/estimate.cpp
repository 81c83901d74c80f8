#include "veil/est/estimate.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "veil/net/loss.hpp"
#include "veil/occ/field.hpp"

namespace veil::est {

namespace {

// One scalar Adam slot; the estimation objective is noisy by construction.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    int t = 0;
    double step(double g, double lr) {
        ++t;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1.0 - std::pow(0.9, t));
        const double vh = v / (1.0 - std::pow(0.999, t));
        return lr * mh / (std::sqrt(vh) + 1e-8);
    }
};

double dot_images(const img::Image& a, const img::Image& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

}  // namespace

EstimationTrace estimate_parameters(net::Discriminator& d_ent,
                                    const std::vector<img::Image>& source_set,
                                    occ::OcclusionKind kind,
                                    const occ::OcclusionConfig& occ_cfg,
                                    const EstimationConfig& cfg) {
    check(!source_set.empty(), "estimate_parameters: empty source set");
    check(cfg.steps >= 1, "estimate_parameters: steps must be >= 1");
    check_range(cfg.init_sigma > 0.0 && cfg.init_sigma <= occ_cfg.sigma_max,
                "estimate_parameters: init_sigma outside (0, sigma_max]");
    check(kind == occ::OcclusionKind::drop || kind == occ::OcclusionKind::dirt,
          "estimate_parameters: only drop and dirt carry a regressable sigma");

    const uint64_t d_hash_before = d_ent.param_hash();

    occ::OcclusionConfig rcfg = occ_cfg;
    rcfg.kind = kind;

    EstimationTrace trace;
    double s = softplus_inv(cfg.init_sigma);
    ScalarAdam adam;

    for (int step = 0; step < cfg.steps; ++step) {
        const double sigma = std::min(softplus(s), occ_cfg.sigma_max);
        occ::PhysicalParams params{kind, sigma};

        Rng step_rng(derive_seed(cfg.seed, static_cast<uint64_t>(step)));
        double loss = 0.0, dloss_dsigma = 0.0;
        for (int b = 0; b < cfg.batch; ++b) {
            const size_t idx = static_cast<size_t>(step_rng.uniform() * source_set.size());
            const img::Image& x = source_set[idx];
            // fresh stochastic realization z per step and batch element
            const occ::DropField field =
                occ::sample_drop_field(step_rng.next_u64(), x.height, x.width, rcfg);

            occ::RenderTangent tangent;
            const occ::OcclusionRender render =
                (kind == occ::OcclusionKind::drop)
                    ? occ::render_raindrops(x, field, params, rcfg, &tangent)
                    : occ::render_dirt(x, field, params, rcfg, &tangent);
            const img::Image y_p = occ::composite(x, render);
            const img::Image dy = occ::composite_dsigma(x, render, tangent);

            const auto scores = d_ent.forward(net::Tensor::from_image(y_p));
            loss += net::lsgan_gen_loss(scores);
            const net::Tensor g_in = d_ent.backward_input(net::lsgan_gen_loss_grad(scores));
            dloss_dsigma += dot_images(g_in.to_image(), dy);
        }
        loss /= cfg.batch;
        dloss_dsigma /= cfg.batch;

        trace.history.emplace_back(sigma, loss);
        if (!std::isfinite(loss) || !std::isfinite(dloss_dsigma)) {
            trace.aborted_non_finite = true;
            break;
        }

        const double gs =
            dloss_dsigma * (softplus(s) < occ_cfg.sigma_max ? softplus_grad(s) : 0.0);
        s -= cfg.adaptive ? adam.step(gs, cfg.step_size) : cfg.step_size * gs;
    }

    trace.final_sigma = std::clamp(softplus(s), 1e-6, occ_cfg.sigma_max);
    check(d_ent.param_hash() == d_hash_before,
          "estimate_parameters: frozen discriminator was mutated (internal error)");
    return trace;
}

namespace {

double photometric_loss_and_grad(const std::vector<PhotometricPair>& pairs,
                                 const occ::OcclusionConfig& cfg, double sigma,
                                 double* dgrad) {
    double loss = 0.0, grad = 0.0;
    for (const PhotometricPair& p : pairs) {
        occ::PhysicalParams params{occ::OcclusionKind::drop, sigma};
        occ::RenderTangent tangent;
        const occ::OcclusionRender render =
            occ::render_raindrops(*p.clear, *p.field, params, cfg, dgrad ? &tangent : nullptr);
        const img::Image y = occ::composite(*p.clear, render);
        const size_t n = y.data.size();
        double l = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double e = y.data[i] - p.occluded->data[i];
            l += e * e;
        }
        loss += l / static_cast<double>(n);
        if (dgrad) {
            const img::Image dy = occ::composite_dsigma(*p.clear, render, tangent);
            double g = 0.0;
            for (size_t i = 0; i < n; ++i)
                g += 2.0 * (y.data[i] - p.occluded->data[i]) * dy.data[i];
            grad += g / static_cast<double>(n);
        }
    }
    if (dgrad) *dgrad = grad / static_cast<double>(pairs.size());
    return loss / static_cast<double>(pairs.size());
}

}  // namespace

PhotometricFit fit_sigma_photometric(const std::vector<PhotometricPair>& pairs,
                                     const occ::OcclusionConfig& cfg, double init_sigma,
                                     int steps, double step_size) {
    check(!pairs.empty(), "fit_sigma_photometric: no pairs");
    double s = softplus_inv(init_sigma);
    ScalarAdam adam;
    PhotometricFit out;
    for (int it = 0; it < steps; ++it) {
        const double sigma = std::min(softplus(s), cfg.sigma_max);
        double grad = 0.0;
        const double loss = photometric_loss_and_grad(pairs, cfg, sigma, &grad);
        out.history.emplace_back(sigma, loss);
        const double gs = grad * (softplus(s) < cfg.sigma_max ? softplus_grad(s) : 0.0);
        s -= adam.step(gs, step_size);
    }
    out.sigma = std::clamp(softplus(s), 1e-6, cfg.sigma_max);
    return out;
}

double grid_search_sigma_photometric(const std::vector<PhotometricPair>& pairs,
                                     const occ::OcclusionConfig& cfg, double lo, double hi,
                                     double step) {
    check(lo > 0.0 && hi >= lo && step > 0.0, "grid_search: bad grid");
    double best_sigma = lo, best_loss = std::numeric_limits<double>::infinity();
    for (double sigma = lo; sigma <= hi + 1e-9; sigma += step) {
        const double loss = photometric_loss_and_grad(pairs, cfg, sigma, nullptr);
        if (loss < best_loss) {
            best_loss = loss;
            best_sigma = sigma;
        }
    }
    return best_sigma;
}

void save_params_file(const std::string& path, occ::OcclusionKind kind, double sigma,
                      const std::string& config_hash) {
    nlohmann::json j;
    j["kind"] = occ::kind_to_string(kind);
    j["sigma"] = sigma;
    j["config_hash"] = config_hash;
    std::ofstream f(path);
    if (!f) throw IoError("cannot write params file: " + path);
    f << j.dump(2) << "\n";
}

ParamsFile load_params_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read params file: " + path);
    nlohmann::json j;
    f >> j;
    ParamsFile p;
    p.kind = occ::kind_from_string(j.at("kind").get<std::string>());
    p.sigma = j.at("sigma").get<double>();
    p.config_hash = j.value("config_hash", "");
    return p;
}

}  // namespace veil::est
