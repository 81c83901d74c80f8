#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "veil/img/png_io.hpp"
#include "veil/metrics/metrics.hpp"
#include "veil/pipe/synthetic.hpp"
#include "veil/pipe/train.hpp"

namespace fs = std::filesystem;
using namespace veil;

namespace {

pipe::Config load_config(const std::string& path) {
    return path.empty() ? pipe::Config{} : pipe::Config::load(path);
}

// Accepts a directory of PNGs (sorted) or a manifest file of relative paths.
std::vector<std::string> collect_inputs(const std::string& where) {
    std::vector<std::string> out;
    if (fs::is_directory(where)) {
        for (const auto& e : fs::directory_iterator(where))
            if (e.path().extension() == ".png") out.push_back(e.path().string());
        std::sort(out.begin(), out.end());
    } else if (fs::is_regular_file(where)) {
        out = pipe::load_manifest(fs::path(where).parent_path().string(),
                                  fs::path(where).filename().string());
    }
    if (out.empty()) throw IoError("no PNG inputs found at: " + where);
    return out;
}

std::unique_ptr<metrics::SmallCnnExtractor> make_extractor(const std::string& extractor_path,
                                                           uint64_t seed) {
    if (!extractor_path.empty())
        return std::make_unique<metrics::SmallCnnExtractor>(
            metrics::SmallCnnExtractor::load(extractor_path));
    // Untrained but deterministic fallback; orderings only, never absolute values.
    return std::make_unique<metrics::SmallCnnExtractor>(3, seed);
}

int cmd_make_data(const std::string& config_path, std::string out_root) {
    const pipe::Config cfg = load_config(config_path);
    if (out_root.empty()) out_root = cfg.data.root;
    pipe::make_synthetic_dataset(cfg, out_root);
    std::cout << "dataset written to " << out_root << "\n";
    return 0;
}

int cmd_train_baseline(const std::string& config_path, const std::string& out_dir) {
    const pipe::Config cfg = load_config(config_path);
    const auto result = pipe::stage1_train_baseline(cfg, out_dir);
    std::cout << "stage1 checkpoint: " << result.checkpoint_path << "\n";
    return 0;
}

int cmd_estimate(const std::string& config_path, const std::string& ckpt,
                 const std::string& data_dir, const std::string& out_params) {
    pipe::Config cfg = load_config(config_path);
    if (!data_dir.empty()) cfg.data.root = data_dir;
    const auto trace = pipe::run_estimation(cfg, ckpt, out_params);
    std::printf("estimated sigma = %.4f over %zu steps%s\n", trace.final_sigma,
                trace.history.size(), trace.aborted_non_finite ? " (aborted: non-finite)" : "");
    std::cout << "params written to " << out_params << "\n";
    return trace.aborted_non_finite ? 1 : 0;
}

int cmd_guidance(const std::string& config_path, const std::string& ckpt,
                 const std::string& data_dir, const std::string& out_dg,
                 const std::string& preview) {
    pipe::Config cfg = load_config(config_path);
    if (!data_dir.empty()) cfg.data.root = data_dir;
    const auto dg = pipe::run_guidance(cfg, ckpt, out_dg, preview);
    std::cout << "guidance map " << dg.dg.width << "x" << dg.dg.height << " (provenance "
              << dg.provenance << ") written to " << out_dg << "\n";
    return 0;
}

int cmd_train_disentangled(const std::string& config_path, const std::string& params,
                           const std::string& dg, const std::string& out_dir) {
    const pipe::Config cfg = load_config(config_path);
    const auto result = pipe::stage3_train_disentangled(cfg, params, dg, out_dir);
    std::cout << "stage3 checkpoint: " << result.checkpoint_path << "\n";
    return 0;
}

int cmd_render(const std::string& config_path, const std::string& ckpt,
               const std::string& data, const std::string& out_dir,
               const std::string& params_path, const std::string& dg_path, double beta,
               double p_r, uint64_t seed) {
    const pipe::Config cfg = load_config(config_path);
    fs::create_directories(out_dir);

    std::unique_ptr<net::Generator> g;
    if (!ckpt.empty())
        g = std::make_unique<net::Generator>(net::load_generator(net::Checkpoint::load(ckpt)));

    est::ParamsFile params{};
    pipe::RenderOptions opts;
    opts.seed = seed;
    opts.p_r = p_r;
    if (!params_path.empty()) {
        params = est::load_params_file(params_path);
        opts.params = &params;
    }
    img::Map2D mask;
    if (!dg_path.empty()) {
        mask = guide::injection_mask_map(guide::load_dg(dg_path), beta);
        opts.mask = &mask;
    }

    const auto inputs = collect_inputs(data);
    int index = 0;
    for (const auto& path : inputs) {
        const img::Image x = img::load_png(path);
        const img::Image y = pipe::render_one(g.get(), x, cfg, opts, index++);
        img::save_png((fs::path(out_dir) / fs::path(path).filename()).string(), y);
    }
    std::cout << "rendered " << inputs.size() << " images to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& metric,
                 const std::string& a_dir, const std::string& b_dir,
                 const std::string& out_report, const std::string& extractor_path) {
    const pipe::Config cfg = load_config(config_path);
    auto fx = make_extractor(extractor_path, cfg.eval.seed);

    metrics::MetricReport report;
    report.metric = metric;
    report.extractor = fx->provenance();
    report.config_hash = cfg.hash;

    const auto a_paths = collect_inputs(a_dir);
    const auto a = pipe::load_images(a_paths);
    report.n_a = static_cast<int>(a.size());

    if (metric == "fid") {
        const auto b = pipe::load_images(collect_inputs(b_dir));
        report.n_b = static_cast<int>(b.size());
        report.value = metrics::fid(a, b, *fx);
    } else if (metric == "is") {
        report.value = metrics::inception_score(a, *fx);
    } else if (metric == "cis") {
        // translations grouped by the filename prefix before the last '_'
        std::map<std::string, std::vector<img::Image>> by_source;
        for (size_t i = 0; i < a_paths.size(); ++i) {
            const std::string stem = fs::path(a_paths[i]).stem().string();
            const auto cut = stem.rfind('_');
            by_source[cut == std::string::npos ? stem : stem.substr(0, cut)].push_back(a[i]);
        }
        std::vector<std::vector<img::Image>> groups;
        for (auto& [key, group] : by_source)
            if (group.size() >= 2) groups.push_back(std::move(group));
        report.value = metrics::conditional_inception_score(groups, *fx);
    } else if (metric == "lpips") {
        if (!b_dir.empty()) {
            const auto b = pipe::load_images(collect_inputs(b_dir));
            report.n_b = static_cast<int>(b.size());
            check(a.size() == b.size(), "evaluate lpips: --a and --b must align");
            std::vector<const img::Image*> pa, pb;
            for (size_t i = 0; i < a.size(); ++i) {
                pa.push_back(&a[i]);
                pb.push_back(&b[i]);
            }
            report.value = metrics::perceptual_distance(pa, pb, *fx);
        } else {
            int used = 0;
            report.value = metrics::perceptual_diversity(a, *fx, cfg.eval.diversity_pairs,
                                                         cfg.eval.seed, &used);
            report.pairs_used = used;
        }
    } else if (metric == "ssim") {
        const auto b = pipe::load_images(collect_inputs(b_dir));
        report.n_b = static_cast<int>(b.size());
        check(a.size() == b.size(), "evaluate ssim: --a and --b must align");
        std::vector<const img::Image*> pa, pb;
        for (size_t i = 0; i < a.size(); ++i) {
            pa.push_back(&a[i]);
            pb.push_back(&b[i]);
        }
        const auto [s, p] = metrics::ssim_psnr(pa, pb);
        report.value = s;
        report.psnr = p;
    } else {
        throw RangeError("evaluate: unknown metric " + metric);
    }

    report.save(out_report);
    if (report.psnr)
        std::printf("%s = %.6f (psnr %.3f dB) -> %s\n", metric.c_str(), report.value,
                    *report.psnr, out_report.c_str());
    else
        std::printf("%s = %.6f -> %s\n", metric.c_str(), report.value, out_report.c_str());
    return 0;
}

int cmd_train_extractor(const std::string& config_path, const std::string& data_root,
                        const std::string& out_path, int steps, uint64_t seed) {
    const pipe::Config cfg = load_config(config_path);
    const std::string root = data_root.empty() ? cfg.data.root : data_root;
    // classes: clear scenes, styled scenes, styled+occluded targets
    std::vector<std::vector<img::Image>> sets;
    sets.push_back(pipe::load_images(collect_inputs(root + "/source")));
    sets.push_back(pipe::load_images(collect_inputs(root + "/gt_style")));
    sets.push_back(pipe::load_images(collect_inputs(root + "/target")));
    metrics::SmallCnnExtractor fx(3, seed);
    fx.train(sets, steps, 2e-3, seed);
    fx.save(out_path);
    std::cout << "extractor (" << fx.provenance() << ") written to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occlusion-disentangled image-to-image translation"};
    app.require_subcommand(1);

    std::string config_path, out_path, ckpt, data_dir, params_path, dg_path, preview;
    std::string metric, a_dir, b_dir, extractor_path;
    double beta = 0.75, p_r = -1.0;
    uint64_t seed = 0;
    int steps = 600;

    auto* make_data = app.add_subcommand("make-data", "generate the synthetic dataset");
    make_data->add_option("--config", config_path, "config file");
    make_data->add_option("--out", out_path, "output root (default: [data] root)");

    auto* baseline = app.add_subcommand("train-baseline", "stage 1: entangled i2i baseline");
    baseline->add_option("--config", config_path, "config file");
    baseline->add_option("--out", out_path, "output directory")->required();

    auto* estimate = app.add_subcommand("estimate-params", "stage 2: adversarial sigma regression");
    estimate->add_option("--config", config_path, "config file");
    estimate->add_option("--checkpoint", ckpt, "stage-1 checkpoint")->required();
    estimate->add_option("--data", data_dir, "dataset root");
    estimate->add_option("--out", out_path, "params.json output")->required();

    auto* guidance = app.add_subcommand("compute-guidance", "stage 2: disentanglement guidance");
    guidance->add_option("--config", config_path, "config file");
    guidance->add_option("--checkpoint", ckpt, "stage-1 checkpoint")->required();
    guidance->add_option("--data", data_dir, "dataset root");
    guidance->add_option("--out", out_path, "dg.bin output")->required();
    guidance->add_option("--preview", preview, "8-bit preview PNG");

    auto* stage3 = app.add_subcommand("train-disentangled", "stage 3: guided disentangled training");
    stage3->add_option("--config", config_path, "config file");
    stage3->add_option("--params", params_path, "params.json from estimate-params")->required();
    stage3->add_option("--dg", dg_path, "dg.bin from compute-guidance")->required();
    stage3->add_option("--out", out_path, "output directory")->required();

    auto* render = app.add_subcommand("render", "translate images, optionally re-injecting occlusions");
    render->add_option("--config", config_path, "config file");
    render->add_option("--checkpoint", ckpt, "generator checkpoint (omit for identity)");
    render->add_option("--data", data_dir, "input directory or manifest")->required();
    render->add_option("--out", out_path, "output directory")->required();
    render->add_option("--params", params_path, "params.json enabling injection");
    render->add_option("--dg", dg_path, "dg.bin for guided injection");
    render->add_option("--beta", beta, "guidance threshold (with --dg)");
    render->add_option("--pr", p_r, "override injection probability");
    render->add_option("--seed", seed, "injection seed");

    auto* evaluate = app.add_subcommand("evaluate", "metric suite");
    evaluate->add_option("--config", config_path, "config file");
    evaluate->add_option("--metric", metric, "fid|is|cis|lpips|ssim")->required();
    evaluate->add_option("--a", a_dir, "first set (dir or manifest)")->required();
    evaluate->add_option("--b", b_dir, "second set (dir or manifest)");
    evaluate->add_option("--out", out_path, "report.json output")->required();
    evaluate->add_option("--extractor", extractor_path, "trained extractor checkpoint");

    auto* train_fx = app.add_subcommand("train-extractor", "train the desk feature extractor");
    train_fx->add_option("--config", config_path, "config file");
    train_fx->add_option("--data", data_dir, "dataset root");
    train_fx->add_option("--out", out_path, "extractor checkpoint output")->required();
    train_fx->add_option("--steps", steps, "training steps");
    train_fx->add_option("--seed", seed, "init/training seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*make_data) return cmd_make_data(config_path, out_path);
        if (*baseline) return cmd_train_baseline(config_path, out_path);
        if (*estimate) return cmd_estimate(config_path, ckpt, data_dir, out_path);
        if (*guidance) return cmd_guidance(config_path, ckpt, data_dir, out_path, preview);
        if (*stage3) return cmd_train_disentangled(config_path, params_path, dg_path, out_path);
        if (*render)
            return cmd_render(config_path, ckpt, data_dir, out_path, params_path, dg_path, beta,
                              p_r, seed);
        if (*evaluate)
            return cmd_evaluate(config_path, metric, a_dir, b_dir, out_path, extractor_path);
        if (*train_fx) return cmd_train_extractor(config_path, data_dir, out_path, steps, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
