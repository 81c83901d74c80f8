#include "veil/pipe/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "veil/img/png_io.hpp"
#include "veil/net/loss.hpp"
#include "veil/occ/field.hpp"
#include "veil/pipe/synthetic.hpp"

namespace veil::pipe {

namespace fs = std::filesystem;

namespace {

constexpr int kLogEvery = 100;

struct InjectionSetup {
    occ::OcclusionConfig rcfg;
    occ::PhysicalParams params;
    const img::Map2D* mask = nullptr;  // injection allowed where mask >= 0.5
};

// y_d plus what the backward pass needs.
struct FakeSample {
    img::Image y_d;
    bool injected = false;
    occ::OcclusionKind kind = occ::OcclusionKind::drop;
    img::Coords coords;  // drop kinds only
    img::Map2D alpha;
    double sigma = 0.0;
    double sigma_max = 0.0;
};

FakeSample make_fake(const img::Image& scene, const InjectionSetup* inj, uint64_t z_seed) {
    FakeSample out;
    if (!inj) {
        out.y_d = scene;
        return out;
    }
    const occ::DropField field = occ::sample_drop_field(z_seed, scene.height, scene.width,
                                                        inj->rcfg, inj->mask);
    if (field.drops.empty() && inj->rcfg.kind != occ::OcclusionKind::overlay) {
        out.y_d = scene;
        return out;
    }
    const occ::OcclusionRender render =
        occ::render_occlusions(scene, field, inj->params, inj->rcfg, z_seed);
    out.y_d = occ::composite(scene, render);
    out.injected = true;
    out.kind = inj->rcfg.kind;
    out.alpha = render.alpha;
    out.sigma = inj->params.sigma;
    out.sigma_max = inj->rcfg.sigma_max;
    if (inj->rcfg.kind == occ::OcclusionKind::drop ||
        inj->rcfg.kind == occ::OcclusionKind::refract) {
        out.coords = occ::displacement_coords(
            occ::drop_displacement(field, scene.height, scene.width, inj->rcfg.magnification));
    }
    return out;
}

img::Image fake_scene_vjp(const FakeSample& s, const img::Image& scene,
                          const img::Image& g_yd) {
    if (!s.injected) return g_yd;
    if (s.kind == occ::OcclusionKind::drop || s.kind == occ::OcclusionKind::refract)
        return occ::composite_raindrops_scene_vjp(scene, s.coords, s.alpha, s.sigma,
                                                  s.sigma_max, g_yd);
    // dirt / overlay / gaussian occluders do not sample the scene
    img::Image grad = g_yd;
    const size_t hw = scene.plane();
    for (int c = 0; c < scene.channels; ++c) {
        double* g = grad.plane_ptr(c);
        for (size_t i = 0; i < hw; ++i) g[i] *= s.alpha.v[i];
    }
    return grad;
}

void scale_grads(const std::vector<net::ParamBlob>& blobs, double s) {
    for (auto& b : blobs)
        for (double& g : *b.grad) g *= s;
}

// Injection must never touch pixels outside the mask dilated by the occluder
// reach plus the blur window.
void assert_alpha_outside_mask(const FakeSample& s, const img::Map2D& mask,
                               const occ::OcclusionConfig& rcfg) {
    if (!s.injected) return;
    const int halo = static_cast<int>(
        std::ceil(rcfg.r_max * (1.0 + 2.0 * rcfg.shape_amp_max + rcfg.shape_noise) + 2.0 +
                  std::ceil(3.0 * rcfg.sigma_max)));
    const int h = mask.height, w = mask.width;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool near_mask = false;
            for (int dy = -halo; dy <= halo && !near_mask; dy += halo)
                for (int dx = -halo; dx <= halo; dx += halo) {
                    const int yy = std::clamp(y + dy, 0, h - 1);
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    if (mask.at(yy, xx) >= 0.5) { near_mask = true; break; }
                }
            // coarse 3x3 probe; exact check only where clearly far from the mask
            if (!near_mask && mask.at(y, x) < 0.5)
                check(s.alpha.at(y, x) == 1.0,
                      "stage3: occlusion rendered outside the dilated injection mask");
        }
}

struct Trainer {
    const Config& cfg;
    const Config::Stage& stage;
    net::Generator g;
    net::Discriminator d;
    net::Adam opt_g, opt_d;
    std::vector<img::Image> sources, targets;
    const InjectionSetup* inj;
    std::string stage_tag;

    Trainer(const Config& cfg_, const Config::Stage& stage_, const InjectionSetup* inj_,
            const std::string& tag)
        : cfg(cfg_),
          stage(stage_),
          g({stage_.g_base, stage_.g_res_blocks}, derive_seed(stage_.seed, 0xa)),
          d({stage_.d_base, 2}, derive_seed(stage_.seed, 0xb)),
          opt_g(stage_.lr_g),
          opt_d(stage_.lr_d),
          inj(inj_),
          stage_tag(tag) {
        sources = load_images(load_manifest(cfg.data.root, cfg.data.train_source));
        targets = load_images(load_manifest(cfg.data.root, cfg.data.train_target));
    }

    TrainResult run(const std::string& out_dir) {
        fs::create_directories(out_dir);
        TrainResult result;
        net::Checkpoint snapshot;
        bool have_snapshot = false;

        const int batch = std::max(1, stage.batch);
        for (int iter = 0; iter < stage.iterations; ++iter) {
            Rng rng(derive_seed(stage.seed, 0x1000 + static_cast<uint64_t>(iter)));

            // --- discriminator step ---
            d.zero_grads();
            double loss_d = 0.0;
            for (int b = 0; b < batch; ++b) {
                const img::Image& x = sources[static_cast<size_t>(rng.uniform() * sources.size())];
                const img::Image& y = targets[static_cast<size_t>(rng.uniform() * targets.size())];
                const img::Image gx = g.forward(net::Tensor::from_image(x)).to_image();
                const FakeSample fake = make_fake(gx, inj, rng.next_u64());
                const auto fake_scores = d.forward(net::Tensor::from_image(fake.y_d));
                d.backward_params(net::lsgan_disc_fake_grad(fake_scores));
                const auto real_scores = d.forward(net::Tensor::from_image(y));
                d.backward_params(net::lsgan_disc_real_grad(real_scores));
                loss_d += net::lsgan_disc_loss(fake_scores, real_scores);
            }
            loss_d /= batch;
            scale_grads(d.params(), 1.0 / batch);
            opt_d.step(d.params());

            // --- generator step ---
            g.zero_grads();
            double loss_g = 0.0;
            for (int b = 0; b < batch; ++b) {
                const img::Image& x = sources[static_cast<size_t>(rng.uniform() * sources.size())];
                const net::Tensor y_g = g.forward(net::Tensor::from_image(x));
                const img::Image scene = y_g.to_image();
                const FakeSample fake = make_fake(scene, inj, rng.next_u64());
                if (inj && iter % 200 == 0 && b == 0)
                    assert_alpha_outside_mask(fake, *inj->mask, inj->rcfg);
                const auto scores = d.forward(net::Tensor::from_image(fake.y_d));
                loss_g += net::lsgan_gen_loss(scores);
                const net::Tensor g_in = d.backward_input(net::lsgan_gen_loss_grad(scores));
                const img::Image g_scene = fake_scene_vjp(fake, scene, g_in.to_image());
                g.backward(net::Tensor::from_image(g_scene));
            }
            loss_g /= batch;
            scale_grads(g.params(), 1.0 / batch);
            opt_g.step(g.params());

            if (!std::isfinite(loss_g) || !std::isfinite(loss_d)) {
                const std::string path = (fs::path(out_dir) / (stage_tag + ".ckpt")).string();
                if (have_snapshot) snapshot.save(path);
                throw ContractError(stage_tag + ": non-finite loss at iteration " +
                                    std::to_string(iter) +
                                    (have_snapshot ? "; checkpoint of last finite state written"
                                                   : "; no finite state to checkpoint"));
            }

            if (iter % kLogEvery == 0 || iter + 1 == stage.iterations) {
                result.log.push_back({static_cast<double>(iter), loss_g, loss_d});
                snapshot = net::Checkpoint{};
                snapshot.stage = stage_tag;
                snapshot.config_hash = cfg.hash;
                net::store_generator(snapshot, g);
                net::store_discriminator(snapshot, d);
                have_snapshot = true;
            }
        }

        net::Checkpoint ck;
        ck.stage = stage_tag;
        ck.config_hash = cfg.hash;
        net::store_generator(ck, g);
        net::store_discriminator(ck, d);
        net::store_adam(ck, "adam.g", opt_g);
        net::store_adam(ck, "adam.d", opt_d);
        result.checkpoint_path = (fs::path(out_dir) / (stage_tag + ".ckpt")).string();
        ck.save(result.checkpoint_path);

        std::ofstream log(fs::path(out_dir) / (stage_tag + "_log.txt"));
        for (const auto& e : result.log)
            log << static_cast<int>(e[0]) << " " << e[1] << " " << e[2] << "\n";
        return result;
    }
};

}  // namespace

TrainResult stage1_train_baseline(const Config& cfg, const std::string& out_dir) {
    Trainer t(cfg, cfg.stage1, nullptr, "stage1");
    return t.run(out_dir);
}

est::EstimationTrace run_estimation(const Config& cfg, const std::string& stage1_ckpt,
                                    const std::string& out_params) {
    const net::Checkpoint ck = net::Checkpoint::load(stage1_ckpt);
    net::Discriminator d_ent = net::load_discriminator(ck);
    const auto sources =
        load_dataset(cfg.data.root, cfg.data.train_source, cfg.estimation.max_images);

    est::EstimationConfig ecfg;
    ecfg.init_sigma = cfg.estimation.init_sigma;
    ecfg.steps = cfg.estimation.steps;
    ecfg.step_size = cfg.estimation.step_size;
    ecfg.batch = cfg.estimation.batch;
    ecfg.seed = cfg.estimation.seed;
    ecfg.adaptive = cfg.estimation.adaptive;

    const auto trace =
        est::estimate_parameters(d_ent, sources, cfg.occlusion.kind, cfg.occlusion, ecfg);
    if (!out_params.empty())
        est::save_params_file(out_params, cfg.occlusion.kind, trace.final_sigma, cfg.hash);
    return trace;
}

guide::GuidanceMap run_guidance(const Config& cfg, const std::string& stage1_ckpt,
                                const std::string& out_dg, const std::string& preview_png) {
    const net::Checkpoint ck = net::Checkpoint::load(stage1_ckpt);
    net::Discriminator d_ent = net::load_discriminator(ck);
    const auto sources =
        load_dataset(cfg.data.root, cfg.data.train_source, cfg.guidance.max_images);
    const guide::GuidanceMap dg = guide::compute_dg(d_ent, sources);
    if (!out_dg.empty()) guide::save_dg(out_dg, dg.dg);
    if (!preview_png.empty()) img::save_png(preview_png, dg.dg);
    return dg;
}

TrainResult stage3_train_disentangled(const Config& cfg, const std::string& params_path,
                                      const std::string& dg_path, const std::string& out_dir) {
    if (!fs::exists(params_path))
        throw ContractError("stage3: missing stage-2 params file: " + params_path);
    if (!fs::exists(dg_path))
        throw ContractError("stage3: missing stage-2 guidance map: " + dg_path);

    const est::ParamsFile params = est::load_params_file(params_path);
    const img::Map2D dg = guide::load_dg(dg_path);
    const img::Map2D mask = guide::injection_mask_map(dg, cfg.stage3.beta);

    InjectionSetup inj;
    inj.rcfg = cfg.occlusion;
    inj.rcfg.kind = occ::kind_from_string(cfg.stage3.kind);
    inj.rcfg.p_r = cfg.stage3.p_r;
    inj.params = occ::PhysicalParams{inj.rcfg.kind, params.sigma};
    inj.mask = &mask;

    Trainer t(cfg, cfg.stage3, &inj, "stage3");
    return t.run(out_dir);
}

img::Image render_one(net::Generator* g, const img::Image& x, const Config& cfg,
                      const RenderOptions& opts, int index) {
    img::Image y = g ? g->translate(x) : x;
    if (!opts.params) return y;
    occ::OcclusionConfig rcfg = cfg.occlusion;
    rcfg.kind = opts.params->kind;
    if (opts.p_r >= 0.0) rcfg.p_r = opts.p_r;
    const uint64_t seed = derive_seed(opts.seed, static_cast<uint64_t>(index));
    const occ::DropField field =
        occ::sample_drop_field(seed, y.height, y.width, rcfg, opts.mask);
    occ::PhysicalParams params{rcfg.kind, opts.params->sigma};
    return occ::composite(y, occ::render_occlusions(y, field, params, rcfg, seed));
}

}  // namespace veil::pipe
